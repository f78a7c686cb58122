#include "aros/certify.hpp"

#include <cmath>
#include <string>

#include "aros/errors.hpp"
#include "aros/rng.hpp"

namespace aros::cert {

Tensor jacobian_at(const ode::Dynamics& dyn, const Tensor& z_row) {
    return nn::mlp_jacobian_value(dyn.net, z_row);
}

DominanceVerdict diag_dominance(const Tensor& a) {
    if (a.rank() != 2 || a.rows() != a.cols()) {
        throw ContractError("diag_dominance: square matrix expected, got " + a.shape_str());
    }
    const std::int64_t d = a.rows();
    DominanceVerdict v;
    v.rows.resize(d);
    v.all_strict = v.all_weak = v.diag_nonpositive = v.diag_negative = true;
    for (std::int64_t i = 0; i < d; ++i) {
        DominanceVerdict::Row& r = v.rows[i];
        r.diag = a.at(i, i);
        for (std::int64_t j = 0; j < d; ++j) {
            if (j != i) r.off_sum += std::abs(a.at(i, j));
        }
        r.strict = std::abs(r.diag) > r.off_sum;
        r.weak = std::abs(r.diag) >= r.off_sum;
        v.all_strict = v.all_strict && r.strict;
        v.all_weak = v.all_weak && r.weak;
        v.diag_nonpositive = v.diag_nonpositive && r.diag <= 0;
        v.diag_negative = v.diag_negative && r.diag < 0;
    }
    return v;
}

double max_real_part_bound(const Tensor& a) {
    if (a.rank() != 2 || a.rows() != a.cols()) {
        throw ContractError("max_real_part_bound: square matrix expected, got " + a.shape_str());
    }
    const std::int64_t d = a.rows();
    Tensor s({d, d});
    for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < d; ++j) s.at(i, j) = 0.5 * (a.at(i, j) + a.at(j, i));

    // Cyclic Jacobi: sweep every upper-triangle pair and rotate it to zero.
    // Off-diagonal mass is monotonically squeezed out, so the diagonal
    // converges to the spectrum. Scale-aware stopping keeps the test
    // meaningful for both tiny and huge matrices.
    double scale = 1.0;
    for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < d; ++j) scale = std::max(scale, std::abs(s.at(i, j)));
    const double tol = 1e-14 * scale;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::int64_t p = 0; p < d; ++p)
            for (std::int64_t q = p + 1; q < d; ++q) off = std::max(off, std::abs(s.at(p, q)));
        if (off <= tol) {
            double top = s.at(0, 0);
            for (std::int64_t i = 1; i < d; ++i) top = std::max(top, s.at(i, i));
            return top;
        }
        for (std::int64_t p = 0; p < d; ++p) {
            for (std::int64_t q = p + 1; q < d; ++q) {
                const double apq = s.at(p, q);
                if (std::abs(apq) <= tol) continue;
                const double theta = (s.at(q, q) - s.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (std::int64_t k = 0; k < d; ++k) {
                    const double skp = s.at(k, p), skq = s.at(k, q);
                    s.at(k, p) = c * skp - sn * skq;
                    s.at(k, q) = sn * skp + c * skq;
                }
                for (std::int64_t k = 0; k < d; ++k) {
                    const double spk = s.at(p, k), sqk = s.at(q, k);
                    s.at(p, k) = c * spk - sn * sqk;
                    s.at(q, k) = sn * spk + c * sqk;
                }
            }
        }
    }
    throw NumericError("max_real_part_bound: Jacobi failed to converge within 100 sweeps");
}

StabilityReport stability_probe(const det::Detector& model, const Tensor& points, double delta,
                                std::int64_t n_dirs, std::uint64_t seed) {
    if (delta <= 0) throw ContractError("stability_probe: delta must be positive");
    if (n_dirs <= 0) throw ContractError("stability_probe: n_dirs must be positive");
    if (points.rank() != 2 || points.cols() != model.dim()) {
        throw ContractError("stability_probe: points must be batch x " +
                            std::to_string(model.dim()) + ", got " + points.shape_str());
    }
    const std::int64_t n = points.rows();
    const std::int64_t d = points.cols();

    StabilityReport report;
    report.delta = delta;
    report.n_dirs = n_dirs;
    report.seed = seed;
    report.points.resize(n);

    Rng rng(derive_seed(seed, "probe"));
    std::int64_t contracting = 0, total_probes = 0, dominant = 0, bound_negative = 0;

    for (std::int64_t i = 0; i < n; ++i) {
        ProbePoint& pp = report.points[i];
        Tensor z({1, d});
        for (std::int64_t j = 0; j < d; ++j) z.at(0, j) = points.at(i, j);

        pp.jacobian = jacobian_at(model.dyn, z);
        const DominanceVerdict verdict = diag_dominance(pp.jacobian);
        pp.dominant = verdict.certified_strict();
        pp.bound = max_real_part_bound(pp.jacobian);
        if (pp.dominant) ++dominant;
        if (pp.bound < 0) ++bound_negative;

        for (std::int64_t dir = 0; dir < n_dirs; ++dir) {
            Tensor u({1, d});
            double norm = 0;
            do {
                for (std::int64_t j = 0; j < d; ++j) u.at(0, j) = rng.normal();
                norm = kern::l2_norm(u);
            } while (norm < 1e-12);

            Tensor z_pert({1, d});
            for (std::int64_t j = 0; j < d; ++j) {
                z_pert.at(0, j) = z.at(0, j) + delta * (u.at(0, j) / norm);
            }
            // Realized initial distance, measured from the stored states the
            // same way the final distance is, so a frozen flow divides a
            // number by itself.
            double dist0 = 0;
            for (std::int64_t j = 0; j < d; ++j) {
                const double diff = z_pert.at(0, j) - z.at(0, j);
                dist0 += diff * diff;
            }
            dist0 = std::sqrt(dist0);

            ++total_probes;
            try {
                const Tensor zt = ode::rk4_value(model.dyn.net, z, model.dyn.horizon,
                                                 model.dyn.steps);
                const Tensor zt_pert = ode::rk4_value(model.dyn.net, z_pert, model.dyn.horizon,
                                                      model.dyn.steps);
                double dist_t = 0;
                for (std::int64_t j = 0; j < d; ++j) {
                    const double diff = zt_pert.at(0, j) - zt.at(0, j);
                    dist_t += diff * diff;
                }
                const double ratio = std::sqrt(dist_t) / dist0;
                pp.ratios.push_back(ratio);
                if (ratio <= 1.0) ++contracting;
            } catch (const NumericError&) {
                pp.diverged = true;
            }
        }
    }

    report.frac_contracting =
        total_probes == 0 ? 0.0 : static_cast<double>(contracting) / total_probes;
    report.frac_dominant = n == 0 ? 0.0 : static_cast<double>(dominant) / n;
    report.frac_bound_negative = n == 0 ? 0.0 : static_cast<double>(bound_negative) / n;
    return report;
}

}  // namespace aros::cert
