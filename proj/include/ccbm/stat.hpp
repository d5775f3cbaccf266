#pragma once

#include <cstdint>
#include <vector>

#include "ccbm/fem.hpp"
#include "ccbm/forward.hpp"
#include "ccbm/mesh.hpp"

namespace ccbm {

// Regular scan lattice of interior probe centers with a shared Gaussian width.
struct ProbeGrid {
    std::vector<Vec2> points; // row-major, n_scan x n_scan
    int n_scan = 0;
    double sigma = 0; // Gaussian width (varsigma)
    double spacing = 0;
};

// Cell-centered lattice; sigma <= 0 selects the default 1.5 * spacing.
ProbeGrid make_probe_grid(const Rect& bounds, int n_scan, double sigma = 0);

// Nodal values of exp(-|x - c|^2 / sigma^2); peak 1 at the center.
Vec gaussian_probe(Vec2 center, double sigma, const FeSpace& space);

// L2 projection <field, probe> through the consistent mass matrix.
double project(const Vec& field_values, const Vec& probe_values, const SpMat& mass);

// Monte-Carlo ensemble of projected topological gradients. Realization i
// uses RNG stream i; samples(i, p) is the projection of realization i onto
// probe p. The clean row holds the noise-free projections.
struct McEnsemble {
    Eigen::MatrixXd samples; // n_mc x n_probes
    Vec clean;               // n_probes
    ProbeGrid grid;
    std::uint64_t base_seed = 0;
    double delta = 0;
};

// Shared, reusable pieces of a statistical run: one factorization serves
// every realization (only the right-hand side carries the noisy trace).
struct McContext {
    const FeSpace& space;
    const BlockSystem& system; // assembled with mu = 0 on the inverse mesh
    const CauchyData& clean_data;
    double beta;
};

McEnsemble mc_run(const McContext& ctx, int n_mc, const ProbeGrid& grid, double delta,
                  std::uint64_t base_seed);

struct ConfidenceMap {
    ProbeGrid grid;
    Vec mean, stdev, ci_lower, ci_upper;
    std::vector<std::uint8_t> reject_h0; // upper confidence bound < 0
    std::vector<std::uint8_t> red_zone;  // strongest-contact subset of the rejections
    double alpha = 0.05;
    int n_mc = 0;
};

// Pointwise asymptotic confidence intervals, mean +- z_{1-alpha/2} s/sqrt(n),
// with the upper-bound rejection rule.
ConfidenceMap ci_map(const McEnsemble& ensemble, double alpha);

// Marks rejected points whose mean lies within fraction * |global min mean|
// of the global minimum mean. Throws NoRejection when nothing is rejected.
ConfidenceMap red_zone(ConfidenceMap map, double fraction = 0.05);

// Running-mean error against the clean reference, averaged over the given
// probes, with the log-log least-squares slope over n in [n_fit_lo, n_mc].
struct ConvergenceSeries {
    std::vector<double> n;
    std::vector<double> err;
    double slope = 0;
};
ConvergenceSeries convergence_diagnostic(const McEnsemble& ensemble,
                                         const std::vector<int>& probe_ids, int n_fit_lo = 10);

// Quantile of the standard normal distribution.
double normal_quantile(double p);

} // namespace ccbm
