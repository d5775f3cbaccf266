#include "ccbm/stat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ccbm/errors.hpp"
#include "ccbm/topograd.hpp"

namespace ccbm {

ProbeGrid make_probe_grid(const Rect& bounds, int n_scan, double sigma) {
    if (n_scan < 1) throw std::invalid_argument("make_probe_grid: n_scan must be >= 1");
    ProbeGrid grid;
    grid.n_scan = n_scan;
    grid.spacing = bounds.width() / n_scan;
    grid.sigma = sigma > 0 ? sigma : 1.5 * grid.spacing;
    grid.points.reserve(static_cast<std::size_t>(n_scan) * n_scan);
    for (int j = 0; j < n_scan; ++j)
        for (int i = 0; i < n_scan; ++i)
            grid.points.push_back({bounds.xmin + (i + 0.5) * bounds.width() / n_scan,
                                   bounds.ymin + (j + 0.5) * bounds.height() / n_scan});
    return grid;
}

Vec gaussian_probe(Vec2 center, double sigma, const FeSpace& space) {
    if (!(sigma > 0)) throw std::invalid_argument("gaussian_probe: sigma must be positive");
    Vec v(space.num_nodes());
    const double inv = 1.0 / (sigma * sigma);
    for (int k = 0; k < space.num_nodes(); ++k) {
        Vec2 d = space.nodes()[k] - center;
        v[k] = std::exp(-dot(d, d) * inv);
    }
    return v;
}

double project(const Vec& field_values, const Vec& probe_values, const SpMat& mass) {
    if (field_values.size() != probe_values.size() || field_values.size() != mass.rows())
        throw MeshMismatch("project: field and probe live on different spaces");
    return probe_values.dot(mass * field_values);
}

McEnsemble mc_run(const McContext& ctx, int n_mc, const ProbeGrid& grid, double delta,
                  std::uint64_t base_seed) {
    if (n_mc < 2) throw std::invalid_argument("mc_run: n_mc must be >= 2");
    const int n_probes = static_cast<int>(grid.points.size());

    // probe nodal vectors premultiplied by the mass matrix, so each
    // projection is a dot product
    Eigen::MatrixXd probes(ctx.space.num_nodes(), n_probes);
    for (int p = 0; p < n_probes; ++p)
        probes.col(p) = ctx.system.mass() * gaussian_probe(grid.points[p], grid.sigma, ctx.space);

    NoiseModel model{NoiseKind::AdditiveBoundary, delta, base_seed};

    auto projected_gradient = [&](const Vec& f_noisy) -> Vec {
        CauchyData data{ctx.clean_data.g, f_noisy};
        ComplexField u = solve_state(ctx.system, ctx.space, data);
        ComplexField v = solve_topo_adjoint(ctx.system, ctx.space, u.im);
        Vec dj = u.im.cwiseProduct(v.re) - u.re.cwiseProduct(v.im);
        return probes.transpose() * dj;
    };

    McEnsemble ens;
    ens.grid = grid;
    ens.base_seed = base_seed;
    ens.delta = delta;
    ens.clean = projected_gradient(ctx.clean_data.f);
    ens.samples.resize(n_mc, n_probes);
    for (int i = 0; i < n_mc; ++i) {
        Vec f_i = delta > 0 ? perturb_boundary(ctx.clean_data.f, model, static_cast<std::uint64_t>(i))
                            : ctx.clean_data.f;
        try {
            ens.samples.row(i) = projected_gradient(f_i).transpose();
        } catch (const SolverFailure& e) {
            throw SolverFailure(std::string(e.what()) + " (stream " + std::to_string(i) + ")");
        }
    }
    return ens;
}

ConfidenceMap ci_map(const McEnsemble& ensemble, double alpha) {
    const int n = static_cast<int>(ensemble.samples.rows());
    const int np = static_cast<int>(ensemble.samples.cols());
    if (n < 2) throw std::invalid_argument("ci_map: need at least 2 realizations");
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("ci_map: alpha must be in (0,1)");

    ConfidenceMap map;
    map.grid = ensemble.grid;
    map.alpha = alpha;
    map.n_mc = n;
    map.mean = ensemble.samples.colwise().mean();
    map.stdev.resize(np);
    for (int p = 0; p < np; ++p) {
        double acc = (ensemble.samples.col(p).array() - map.mean[p]).square().sum();
        map.stdev[p] = std::sqrt(acc / (n - 1));
    }
    const double z = normal_quantile(1.0 - alpha / 2.0);
    const double half_width = z / std::sqrt(static_cast<double>(n));
    map.ci_lower = map.mean - half_width * map.stdev;
    map.ci_upper = map.mean + half_width * map.stdev;
    map.reject_h0.resize(np);
    map.red_zone.assign(np, 0);
    for (int p = 0; p < np; ++p) map.reject_h0[p] = map.ci_upper[p] < 0 ? 1 : 0;
    return map;
}

ConfidenceMap red_zone(ConfidenceMap map, double fraction) {
    double m_star = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t p = 0; p < map.reject_h0.size(); ++p)
        if (map.reject_h0[p]) {
            any = true;
            m_star = std::min(m_star, map.mean[static_cast<Eigen::Index>(p)]);
        }
    if (!any) throw NoRejection("red_zone: no rejected point");
    double cut = m_star + fraction * std::abs(m_star);
    for (std::size_t p = 0; p < map.reject_h0.size(); ++p)
        map.red_zone[p] = (map.reject_h0[p] && map.mean[static_cast<Eigen::Index>(p)] <= cut) ? 1 : 0;
    return map;
}

ConvergenceSeries convergence_diagnostic(const McEnsemble& ensemble,
                                         const std::vector<int>& probe_ids, int n_fit_lo) {
    const int n_mc = static_cast<int>(ensemble.samples.rows());
    ConvergenceSeries s;
    s.n.reserve(n_mc);
    s.err.reserve(n_mc);

    std::vector<double> running(probe_ids.size(), 0.0);
    for (int n = 1; n <= n_mc; ++n) {
        double avg_err = 0;
        for (std::size_t k = 0; k < probe_ids.size(); ++k) {
            running[k] += ensemble.samples(n - 1, probe_ids[k]);
            avg_err += std::abs(running[k] / n - ensemble.clean[probe_ids[k]]);
        }
        s.n.push_back(n);
        s.err.push_back(avg_err / static_cast<double>(probe_ids.size()));
    }

    // least-squares slope of log err vs log n over [n_fit_lo, n_mc]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int n = n_fit_lo; n <= n_mc; ++n) {
        double e = s.err[n - 1];
        if (e <= 0) continue; // exactly-zero error (noise-free ensembles)
        double x = std::log(static_cast<double>(n)), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    s.slope = (m >= 2) ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    return s;
}

// Acklam's rational approximation with one Halley refinement; accurate to
// machine precision over (0, 1).
double normal_quantile(double p) {
    if (!(p > 0 && p < 1)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= phigh) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    // Halley step against the exact CDF
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2.0 * 3.141592653589793) * std::exp(x * x / 2.0);
    x = x - u / (1 + x * u / 2);
    return x;
}

} // namespace ccbm
