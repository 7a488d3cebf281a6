#pragma once

#include "cvp/measure.hpp"

#include <cstdint>

namespace cvp {

// sum_{i,j} w_i w_j L_kappa(x_i, x_j), diagonal included.
double action(const StaticSystem& s);
double action(const StaticSystem& s, const PairTable& t);

// Sets s so that the minimum of ell_kappa over the support is zero; ties go to
// the lowest index.
StaticSystem calibrate_s(StaticSystem s);

struct RescaleResult {
    StaticSystem system;
    double trace_constant = 0.0; // lambda c
    double s_param = 0.0;        // sigma lambda^4 s
};
// x -> lambda x, w -> sigma w
RescaleResult rescale(const StaticSystem& s, double lambda, double sigma);

struct SystemSpec {
    int points = 8;
    int ambient = 4;
    int spin = 1;
    double kappa = 0.1;
    double trace = 1.0;
    double volume = 1.0;
    std::uint64_t seed = 1;
    QuadratureSpec quad;
};
// Random feasible start: points of F with the prescribed trace, integer
// generator, weights normalized to the volume.
StaticSystem random_system(const SystemSpec& spec);

struct OptimizeOptions {
    int iterations = 2000;
    double weight_rate = 0.5;  // initial exponentiated-gradient rate
    int weight_inner = 200;    // weight steps per point step (kernel held fixed)
    double point_step = 0.05;  // initial step, relative to ||x|| / ||g||
    double anneal = 0.0;       // temperature of random point kicks
    int anneal_steps = 0;
    std::uint64_t seed = 1;
    double prune = 1e-12;      // relative to the volume
    double tolerance = 1e-9;   // stationarity target, relative to the action scale
    int stall = 100;           // stop when this many iterations gain nothing
    bool calibrate = true;
    std::vector<int> frozen;   // points that keep their position (weights still move)
    Exec exec = Exec::parallel;
};

struct OptimizeReport {
    double action_initial = 0.0;
    double action_final = 0.0;
    int iterations = 0;
    int rejected = 0;          // point steps rejected by the projection
    int pruned = 0;
    double weight_stationarity = 0.0; // max (ell_i - min ell) / scale
    double point_stationarity = 0.0;  // max ||P grad ell(x_i)|| ||x_i|| / scale
    double volume_drift = 0.0;
    double trace_drift = 0.0;
    bool monotone = true;
    std::vector<double> history;
};

// Frozen indices are remapped when atoms are pruned and returned through
// inner_region of the result if they were taken from there.
StaticSystem minimize(const StaticSystem& start, const OptimizeOptions& opt = {}, OptimizeReport* report = nullptr);

// Action per unit volume, the natural size of ell_kappa and its residuals.
double action_scale(const StaticSystem& s);

} // namespace cvp
