#pragma once

#include "cvp/measure.hpp"

namespace cvp {

struct MassReport {
    double value = 0.0;
    std::vector<double> partials;       // bracket per outer cut
    std::vector<double> volume;         // mu(Omega) per cut
    std::vector<double> volume_tilde;   // mu~(Omega~) per cut
    double volume_mismatch = 0.0;       // at the final cut
    bool converged = false;
    double cauchy_gap = 0.0;            // spread of the last partials
    double reversed_gap = 0.0;          // against the other limit order
};

struct MassOptions {
    double gap = 1e-8;  // relative to 1 + |M|
    int last = 3;
    Exec exec = Exec::parallel;
};

// Cross table with rows in st (the tilde system) and columns in s.
PairTable cross_table(const StaticSystem& st, const StaticSystem& s, Exec exec = Exec::parallel);

// sum_{Omega~} sum_{N \ Omega} w~ w L_kappa - sum_{Omega} sum_{N~ \ Omega~} w w~ L_kappa
// for per-point memberships (1 = inside).
double nonlinear_sli(const StaticSystem& st, const StaticSystem& s, const RVec& omega_t, const RVec& omega,
                     const PairTable& cross);
double nonlinear_sli(const StaticSystem& st, const StaticSystem& s, const std::vector<int>& omega_t,
                     const std::vector<int>& omega);

// -s (mu~(Omega~) - mu(Omega)) + gamma, inner limit over Omega~ first.
MassReport total_mass_general(const StaticSystem& st, const StaticSystem& s, const Exhaustion& e,
                              const Exhaustion& et, const MassOptions& opt = {});
MassReport total_mass_general(const StaticSystem& st, const StaticSystem& s, const Exhaustion& e,
                              const Exhaustion& et, const PairTable& cross, const MassOptions& opt = {});

// sum w~ (n~ - s) - sum w (n - s)
double spatial_integral_form(const StaticSystem& st, const StaticSystem& s);
double spatial_integral_form(const StaticSystem& st, const StaticSystem& s, const PairTable& cross);

// gamma^{Omega~_k, Omega_k} along cuts of equal volume; both exhaustion
// orders are cut at the union of their atom boundaries.
MassReport total_mass_matched(const StaticSystem& st, const StaticSystem& s, const Exhaustion& e,
                              const Exhaustion& et, const MassOptions& opt = {});
MassReport total_mass_matched(const StaticSystem& st, const StaticSystem& s, const Exhaustion& e,
                              const Exhaustion& et, const PairTable& cross, const MassOptions& opt = {});

// Bracket at paired cuts (Omega_k, Omega~_k) and its correlation form
// nu~(Omega~_k) - nu(Omega_k) - s (mu~(Omega~_k) - mu(Omega_k)).
struct CutIdentity {
    std::vector<double> bracket, correlation;
    double max_gap = 0.0;
};
CutIdentity cut_identity(const StaticSystem& st, const StaticSystem& s, const Exhaustion& e, const Exhaustion& et,
                         const PairTable& cross);

// Spatial form with the inner regions removed from the integration ranges.
double total_mass_excised(const StaticSystem& st, const StaticSystem& s, const std::vector<int>& inner_t,
                          const std::vector<int>& inner);
double total_mass_excised(const StaticSystem& st, const StaticSystem& s, const std::vector<int>& inner_t,
                          const std::vector<int>& inner, const PairTable& cross);

struct ExcisionReport {
    double excised = 0.0;
    double mass = 0.0;
    double correction = 0.0; // s (mu~(I~) - mu(I))
    double gap = 0.0;        // |excised - mass - correction|
};
ExcisionReport excision_identity(const StaticSystem& st, const StaticSystem& s, const std::vector<int>& inner_t,
                                 const std::vector<int>& inner);

struct UnitaryReport {
    double mass = 0.0;
    double mass_transformed = 0.0;
    double gap = 0.0;
    double commutator = 0.0;   // ||[W, H]||
    double table_change = 0.0; // max change of a cross-table entry
    bool static_w = true;
};

// W = exp(i theta A) applied to the tilde system.
Mat unitary_from(const Mat& a, double theta);
UnitaryReport unitary_invariance_check(const StaticSystem& st, const StaticSystem& s, const Mat& w,
                                       double tolerance = 1e-9);

double volume_of(const StaticSystem& s, const RVec& omega);

} // namespace cvp
