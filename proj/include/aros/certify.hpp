#pragma once

#include <cstdint>
#include <vector>

#include "aros/detector.hpp"
#include "aros/ode.hpp"
#include "aros/tensor.hpp"

namespace aros::cert {

// Field Jacobian at a single state, values only. The certification paths
// never need gradients of the certificate itself.
Tensor jacobian_at(const ode::Dynamics& dyn, const Tensor& z_row);

// Row-by-row diagonal dominance breakdown of a square matrix. The classical
// certificate needs the strict comparison plus a negative diagonal; the
// non-strict variant and the sign flags are reported separately so callers
// can see exactly which half of the test failed.
struct DominanceVerdict {
    struct Row {
        double diag = 0;      // a_ii itself, sign intact
        double off_sum = 0;   // sum_{j != i} |a_ij|
        bool strict = false;  // |a_ii| >  off_sum
        bool weak = false;    // |a_ii| >= off_sum
    };
    std::vector<Row> rows;
    bool all_strict = false;
    bool all_weak = false;
    bool diag_nonpositive = false;  // every a_ii <= 0
    bool diag_negative = false;     // every a_ii <  0

    // The certificate actually used downstream: dominance plus a diagonal
    // that cannot sit on the imaginary axis.
    bool certified_strict() const { return all_strict && diag_negative; }
    bool certified_weak() const { return all_weak && diag_nonpositive; }
};

DominanceVerdict diag_dominance(const Tensor& a);

// Upper bound on the largest real part of any eigenvalue of A: the top
// eigenvalue of the symmetric part (A + A^T)/2, computed with cyclic Jacobi
// rotations. A negative bound certifies an asymptotically stable
// linearization. Throws NumericError if 100 sweeps fail to converge.
double max_real_part_bound(const Tensor& a);

// Empirical contraction probe around one state: flow the point and a
// perturbed copy for the model's own horizon and compare distances.
struct ProbePoint {
    Tensor jacobian;             // field Jacobian at the probe state
    bool dominant = false;       // strict dominance with negative diagonal
    double bound = 0;            // symmetric-part eigenvalue bound
    std::vector<double> ratios;  // final distance / initial distance, per direction
    bool diverged = false;       // integration blew up for some direction
};

struct StabilityReport {
    std::vector<ProbePoint> points;
    double delta = 0;
    std::int64_t n_dirs = 0;
    std::uint64_t seed = 0;
    double frac_contracting = 0;    // probes with ratio <= 1 (diverged counts no)
    double frac_dominant = 0;       // points whose Jacobian certificate holds
    double frac_bound_negative = 0; // points with a negative eigenvalue bound
};

// For each row of `points` draws n_dirs random unit directions, flows the
// point and point + delta * u through the model's field, and reports the
// contraction ratio per direction. The denominator is the realized initial
// distance ||delta * u|| (equal to delta up to rounding), which makes a
// frozen flow report exactly 1. Divergence inside the integrator flags the
// point instead of aborting the probe.
StabilityReport stability_probe(const det::Detector& model, const Tensor& points, double delta,
                                std::int64_t n_dirs, std::uint64_t seed);

}  // namespace aros::cert
