#pragma once

#include <stdexcept>
#include <string>

namespace cprojlab {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SignatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IllConditioned : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HermitianViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ClusterAmbiguity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoStabilization : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularSolution : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotHolomorphic : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OrbitExitsChart : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExpressionResidualTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPropertyP : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonRegularPoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ManifestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cprojlab
