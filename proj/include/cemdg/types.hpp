#ifndef CEMDG_TYPES_HPP
#define CEMDG_TYPES_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace cemdg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Vector2 = Eigen::Vector2d;

// configuration problems (bad counts, bad files, bad parameters)
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// bad numerical input (non-finite source values, zero reference norms)
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// factorization breakdown, tolerance not reached, empty spaces
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cemdg

#endif
