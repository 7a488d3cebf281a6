#include "cvp/numeric.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>

namespace cvp {

namespace {
std::atomic<int> g_threads{0};

template <class T>
T pairwise(const T* v, std::size_t n)
{
    if (n <= 8) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise(v, h) + pairwise(v + h, n - h);
}
} // namespace

void set_threads(int k)
{
    g_threads = std::max(k, 0);
    if (k > 0) omp_set_num_threads(k);
}

int threads()
{
    int k = g_threads;
    return k > 0 ? k : omp_get_max_threads();
}

double pairwise_sum(std::span<const double> v) { return pairwise(v.data(), v.size()); }
cplx pairwise_sum(std::span<const cplx> v) { return pairwise(v.data(), v.size()); }

double op_norm(const Mat& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

double herm_defect(const Mat& m) { return (m - m.adjoint()).norm(); }

Mat hermitian_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

double normal(std::mt19937_64& rng)
{
    std::normal_distribution<double> d(0.0, 1.0);
    return d(rng);
}

double uniform(std::mt19937_64& rng, double a, double b)
{
    std::uniform_real_distribution<double> d(a, b);
    return d(rng);
}

Mat random_hermitian(int f, std::mt19937_64& rng)
{
    Mat a(f, f);
    for (int i = 0; i < f; ++i)
        for (int j = 0; j < f; ++j) a(i, j) = cplx(normal(rng), normal(rng));
    return hermitian_part(a);
}

Mat random_unitary(int f, std::mt19937_64& rng)
{
    Mat a(f, f);
    for (int i = 0; i < f; ++i)
        for (int j = 0; j < f; ++j) a(i, j) = cplx(normal(rng), normal(rng));
    Eigen::HouseholderQR<Mat> qr(a);
    Mat q = qr.householderQ();
    return q;
}

double frob_dot(const Mat& a, const Mat& b) { return (a.adjoint() * b).trace().real(); }

} // namespace cvp
