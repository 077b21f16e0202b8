#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace qwalk {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Graph-file syntax error, carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Structural problem with a graph or an operation's inputs
/// (degree mismatch, non-unitary block, window too small, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (eigensolver breakdown, ill-conditioned solve,
/// coefficient extraction that does not stabilize).
class NumericsError : public Error {
 public:
  using Error::Error;
};

}  // namespace qwalk
