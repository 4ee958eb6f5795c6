#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hyfsi {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;

// Error hierarchy. Every failure the solver can report derives from Error so
// callers (CLI, run driver) can catch one type and still inspect the kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class DegenerateElement : public Error {
 public:
  DegenerateElement(int element, double det_j)
      : Error("degenerate element " + std::to_string(element) +
              " (det J = " + std::to_string(det_j) + ")"),
        element_(element),
        det_j_(det_j) {}
  int element() const { return element_; }
  double det_j() const { return det_j_; }

 private:
  int element_;
  double det_j_;
};

class ElementInversion : public Error {
 public:
  ElementInversion(int element, double det_f)
      : Error("solid element " + std::to_string(element) +
              " inverted (det F = " + std::to_string(det_f) + ")"),
        element_(element),
        det_f_(det_f) {}
  int element() const { return element_; }
  double det_f() const { return det_f_; }

 private:
  int element_;
  double det_f_;
};

class MeshDistortion : public Error {
 public:
  MeshDistortion(int element, double det_j)
      : Error("fluid patch element " + std::to_string(element) +
              " distorted (det J = " + std::to_string(det_j) + ")"),
        element_(element),
        det_j_(det_j) {}
  int element() const { return element_; }
  double det_j() const { return det_j_; }

 private:
  int element_;
  double det_j_;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, int dof) : Error(what), dof_(dof) {}
  // Global dof id of the offending (near-zero) pivot, -1 if unknown.
  int dof() const { return dof_; }

 private:
  int dof_;
};

class NonlinearDivergence : public Error {
 public:
  NonlinearDivergence(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace hyfsi
