#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvp {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Exit codes of the command line tool double as error categories.
enum class ErrorKind { schema = 2, invariant = 3, convergence = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Execution policy for the O(N^2) pair kernels. The serial variants are the
// reference implementations; both produce bit-identical results.
enum class Exec { serial, parallel };

void set_threads(int k);
int threads();

} // namespace cvp
