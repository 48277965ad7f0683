#pragma once
// Error taxonomy shared by all modules. The CLI maps kinds to exit codes:
// config -> 2, data/lookup/contract -> 3, divergence -> 4.

#include <stdexcept>
#include <string>

namespace arblink {

enum class ErrorKind { Config, Data, Contract, Lookup, Divergence };

class ArbError : public std::runtime_error {
 public:
  ArbError(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : ArbError {
  explicit ConfigError(const std::string& m) : ArbError(ErrorKind::Config, m) {}
};
struct DataError : ArbError {
  explicit DataError(const std::string& m) : ArbError(ErrorKind::Data, m) {}
};
struct ContractError : ArbError {
  explicit ContractError(const std::string& m) : ArbError(ErrorKind::Contract, m) {}
};
struct LookupError : ArbError {
  explicit LookupError(const std::string& m) : ArbError(ErrorKind::Lookup, m) {}
};
struct DivergenceError : ArbError {
  explicit DivergenceError(const std::string& m) : ArbError(ErrorKind::Divergence, m) {}
};

// Non-fatal diagnostics (clamped parameters etc.) go to stderr so result
// files stay byte-identical.
void warn(const std::string& msg);

}  // namespace arblink
