#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace graspsim {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Positions = std::vector<Vec2>;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Base for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: config, polygon, grasp list, label file, or an invalid scene.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Raised when a geometric precondition fails (self-intersection, overlap).
class GeometryError : public InputError {
 public:
  using InputError::InputError;
};

/// Nonlinear or linear solver failure. `diagnostics` carries the last iterate summary.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::string diagnostics = {})
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  std::string diagnostics_;
};

/// Scripted vertices cannot reach their targets without collision or inversion.
class ScriptedMotionBlocked : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace graspsim
