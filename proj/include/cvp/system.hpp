#pragma once

#include "cvp/static.hpp"

#include <optional>
#include <vector>

namespace cvp {

struct DiscreteMeasure {
    std::vector<OperatorPoint> points;
    std::vector<double> weights;

    int size() const { return static_cast<int>(points.size()); }
    double volume() const;
};

// A static measure together with everything needed to evaluate its kernel.
struct StaticSystem {
    Model model;
    DiscreteMeasure measure;
    double s_param = 0.0;
    std::vector<int> inner_region;

    int size() const { return measure.size(); }
    double kappa() const { return model.kernel.kappa; }
    const OperatorPoint& point(int i) const { return measure.points[i]; }
    double weight(int i) const { return measure.weights[i]; }
};

// Structural checks: positive weights, matching dimensions, valid indices.
void check_system(const StaticSystem& s);

// Both systems must live on the same Hilbert space with the same group and
// Lagrange parameters for cross evaluations.
void check_compatible(const StaticSystem& a, const StaticSystem& b);

// Static L and T between every point of a and every point of b.
struct PairTable {
    RMat L, T;
    RMat kappa(double k) const { return L + k * T; }
};

PairTable pair_table(const StaticSystem& a, const StaticSystem& b, Exec exec = Exec::parallel);
// Symmetric table of a system with itself; only i <= j is evaluated.
PairTable self_table(const StaticSystem& s, Exec exec = Exec::parallel);

// Row sums sum_j w_j K(i, j) with pairwise summation.
RVec weighted_rows(const RMat& k, const std::vector<double>& w);

// Nested subsets ordered by a radius function; cut_points are cumulative
// volume thresholds (increasing, the last one is the total volume).
struct Exhaustion {
    std::vector<int> order;
    std::vector<double> cut_points;
};

// Radius = operator norm distance from the center matrix.
std::vector<double> radii_from(const StaticSystem& s, const Mat& center);

// One cut after every atom in radius order (ties broken by index).
Exhaustion exhaustion_by_radius(const StaticSystem& s, const std::vector<double>& radii);
Exhaustion exhaustion_by_radius(const StaticSystem& s, const Mat& center);

// Cuts at the given volumes over a fixed order.
Exhaustion exhaustion_at_volumes(const std::vector<int>& order, std::vector<double> volumes);

// Fraction of each atom inside the set of cumulative volume v along the
// exhaustion order. The frontier atom is split, which leaves the measure
// unchanged but lets a cut hit any volume exactly.
RVec membership(const StaticSystem& s, const Exhaustion& e, double volume);
RVec membership_of(int n, const std::vector<int>& indices);

void check_exhaustion(const StaticSystem& s, const Exhaustion& e);

} // namespace cvp
