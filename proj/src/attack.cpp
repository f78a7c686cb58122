#include "aros/attack.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "aros/errors.hpp"
#include "aros/rng.hpp"
#include "aros/tape.hpp"

namespace aros::eval {

void AttackConfig::validate() const {
    if (!std::isfinite(epsilon) || epsilon < 0)
        throw ConfigError("attack: epsilon must be finite and >= 0, got " +
                          std::to_string(epsilon));
    if (steps < 1) throw ConfigError("attack: steps must be >= 1, got " + std::to_string(steps));
    if (restarts < 1)
        throw ConfigError("attack: restarts must be >= 1, got " + std::to_string(restarts));
    if (!std::isfinite(alpha) || alpha < 0)
        throw ConfigError("attack: alpha must be finite and >= 0, got " + std::to_string(alpha));
}

const char* norm_name(AttackConfig::Norm n) {
    return n == AttackConfig::Norm::kLinf ? "linf" : "l2";
}

AttackConfig::Norm norm_from_name(const std::string& s) {
    if (s == "linf") return AttackConfig::Norm::kLinf;
    if (s == "l2") return AttackConfig::Norm::kL2;
    throw ConfigError("attack: unknown norm '" + s + "' (expected linf or l2)");
}

namespace {

// Projects each row of `cur` onto the epsilon-ball around the matching row of
// `origin`, then into [0,1] when requested. Row = all elements with the same
// leading index, flattened.
void project(Tensor& cur, const Tensor& origin, const AttackConfig& cfg, std::int64_t n,
             std::int64_t m) {
    for (std::int64_t i = 0; i < n; ++i) {
        double* c = cur.data() + i * m;
        const double* o = origin.data() + i * m;
        if (cfg.norm == AttackConfig::Norm::kLinf) {
            for (std::int64_t j = 0; j < m; ++j)
                c[j] = std::clamp(c[j], o[j] - cfg.epsilon, o[j] + cfg.epsilon);
        } else {
            double sq = 0;
            for (std::int64_t j = 0; j < m; ++j) {
                const double d = c[j] - o[j];
                sq += d * d;
            }
            const double dist = std::sqrt(sq);
            if (dist > cfg.epsilon) {
                const double s = cfg.epsilon / dist;
                for (std::int64_t j = 0; j < m; ++j) c[j] = o[j] + s * (c[j] - o[j]);
            }
        }
        if (cfg.clamp_unit)
            for (std::int64_t j = 0; j < m; ++j) c[j] = std::clamp(c[j], 0.0, 1.0);
    }
}

void require_finite(const Tensor& v, const char* what, std::int64_t restart) {
    for (std::int64_t i = 0; i < v.numel(); ++i)
        if (!std::isfinite(v[i]))
            throw NumericError(std::string("attack: ") + what +
                               " is not finite at restart " + std::to_string(restart));
}

}  // namespace

Tensor pgd_on_score(const Scorer& scorer, const Tensor& x, bool is_id, const AttackConfig& cfg) {
    cfg.validate();
    if (x.rank() < 2 || x.shape()[0] < 1)
        throw ContractError("attack: input must be a nonempty batch, got shape " + x.shape_str());
    for (std::int64_t i = 0; i < x.numel(); ++i)
        if (!std::isfinite(x[i])) throw ContractError("attack: input is not finite");
    if (cfg.epsilon == 0) return x;

    const std::int64_t n = x.shape()[0];
    const std::int64_t m = x.numel() / n;
    const double sign = is_id ? 1.0 : -1.0;
    const double alpha = cfg.resolved_alpha();

    Tensor best = x;
    std::vector<double> best_obj(n);
    {
        const Tensor s0 = scorer.score(x);
        for (std::int64_t i = 0; i < n; ++i) best_obj[i] = sign * s0[i];
    }
    const auto consider = [&](const Tensor& cand, const Tensor& scores) {
        for (std::int64_t i = 0; i < n; ++i) {
            const double obj = sign * scores[i];
            if (obj > best_obj[i]) {
                best_obj[i] = obj;
                std::copy(cand.data() + i * m, cand.data() + (i + 1) * m, best.data() + i * m);
            }
        }
    };

    for (std::int64_t r = 0; r < cfg.restarts; ++r) {
        Rng rng(derive_seed(cfg.seed, "attack_restart", static_cast<std::uint64_t>(r)));
        Tensor cur = x;
        for (std::int64_t i = 0; i < cur.numel(); ++i)
            cur[i] += rng.uniform(-cfg.epsilon, cfg.epsilon);
        project(cur, x, cfg, n, m);

        for (std::int64_t step = 0; step < cfg.steps; ++step) {
            ad::Tape t;
            const ad::NodeId xn = t.leaf(cur);
            const ad::NodeId sn = scorer.build(t, xn);
            require_finite(t.val(sn), "score", r);
            consider(cur, t.val(sn));

            const Tensor g = t.backward(t.sum(sn)).of_node(xn);
            require_finite(g, "gradient", r);

            if (cfg.norm == AttackConfig::Norm::kLinf) {
                for (std::int64_t i = 0; i < cur.numel(); ++i)
                    if (g[i] != 0) cur[i] += alpha * sign * (g[i] > 0 ? 1.0 : -1.0);
            } else {
                for (std::int64_t i = 0; i < n; ++i) {
                    double sq = 0;
                    for (std::int64_t j = 0; j < m; ++j) sq += g[i * m + j] * g[i * m + j];
                    const double norm = std::sqrt(sq);
                    if (norm < 1e-20) continue;  // flat row: leave it where it is
                    for (std::int64_t j = 0; j < m; ++j)
                        cur[i * m + j] += alpha * sign * g[i * m + j] / norm;
                }
            }
            project(cur, x, cfg, n, m);
        }
        consider(cur, scorer.score(cur));
    }

    // Feasibility is enforced by construction; a violation here is a bug.
    const double tol = cfg.epsilon * (1 + 1e-9) + 1e-15;
    for (std::int64_t i = 0; i < n; ++i) {
        double dist = 0;
        for (std::int64_t j = 0; j < m; ++j) {
            const double d = best[i * m + j] - x[i * m + j];
            if (cfg.norm == AttackConfig::Norm::kLinf) dist = std::max(dist, std::abs(d));
            else dist += d * d;
        }
        if (cfg.norm == AttackConfig::Norm::kL2) dist = std::sqrt(dist);
        if (!(dist <= tol))
            throw ContractError("attack: result left the budget (row " + std::to_string(i) +
                                ", distance " + std::to_string(dist) + "); this is a bug");
    }
    return best;
}

}  // namespace aros::eval
