#pragma once

#include <stdexcept>
#include <string>

namespace labeldyn {

// Exit-code conventions shared with the CLI:
//   2 = validation / contract violation, 3 = runtime abort, 4 = solver failure.
class Error : public std::runtime_error {
  public:
  Error(std::string msg, int exit_code)
      : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

  private:
  int exit_code_;
};

struct ContractViolation : Error {
  explicit ContractViolation(const std::string& msg) : Error("contract violation: " + msg, 2) {}
};

struct InvalidLabel : Error {
  explicit InvalidLabel(const std::string& msg) : Error("invalid label: " + msg, 2) {}
};

struct InvalidRateMatrix : Error {
  explicit InvalidRateMatrix(const std::string& msg) : Error("invalid rate matrix: " + msg, 2) {}
};

struct NotReversible : Error {
  explicit NotReversible(const std::string& msg) : Error("not reversible: " + msg, 2) {}
};

struct ReducibleChain : Error {
  explicit ReducibleChain(const std::string& msg) : Error("reducible chain: " + msg, 2) {}
};

struct ScenarioError : Error {
  explicit ScenarioError(const std::string& msg) : Error("scenario: " + msg, 2) {}
};

struct SimplexViolation : Error {
  explicit SimplexViolation(const std::string& msg) : Error("simplex violation: " + msg, 3) {}
};

struct NearSingularMetric : Error {
  explicit NearSingularMetric(const std::string& msg) : Error("near-singular metric: " + msg, 3) {}
};

struct GeodesicFailure : Error {
  explicit GeodesicFailure(const std::string& msg) : Error("geodesic failure: " + msg, 3) {}
};

struct FieldEvaluation : Error {
  explicit FieldEvaluation(const std::string& msg) : Error("field evaluation: " + msg, 3) {}
};

struct RuntimeAbort : Error {
  explicit RuntimeAbort(const std::string& msg) : Error(msg, 3) {}
};

struct NonConvergence : Error {
  explicit NonConvergence(const std::string& msg) : Error("solver did not converge: " + msg, 4) {}
};

}  // namespace labeldyn
