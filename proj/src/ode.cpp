#include "aros/ode.hpp"

#include <string>

#include "aros/errors.hpp"

namespace aros::ode {

void Dynamics::validate() const {
    net.validate();
    if (net.in_dim() != net.out_dim())
        throw ContractError("dynamics: field must map d to d, got " +
                            std::to_string(net.in_dim()) + " to " +
                            std::to_string(net.out_dim()));
    if (steps < 1) throw ContractError("dynamics: step count must be positive");
    if (!(horizon > 0.0)) throw ContractError("dynamics: horizon must be positive");
}

ad::NodeId rk4_on_tape(ad::Tape& t, const nn::MlpNodes& net, ad::NodeId z0, double horizon,
                       std::int64_t steps) {
    if (steps < 1) throw ContractError("rk4: step count must be positive");
    const double h = horizon / static_cast<double>(steps);
    ad::NodeId z = z0;
    for (std::int64_t s = 0; s < steps; ++s) {
        const ad::NodeId k1 = nn::mlp_apply(t, net, z);
        const ad::NodeId k2 = nn::mlp_apply(t, net, t.add(z, t.scale(k1, h / 2.0)));
        const ad::NodeId k3 = nn::mlp_apply(t, net, t.add(z, t.scale(k2, h / 2.0)));
        const ad::NodeId k4 = nn::mlp_apply(t, net, t.add(z, t.scale(k3, h)));
        const ad::NodeId acc =
            t.add(t.add(t.add(k1, t.scale(k2, 2.0)), t.scale(k3, 2.0)), k4);
        z = t.add(z, t.scale(acc, h / 6.0));
        if (!t.val(z).all_finite())
            throw NumericError("rk4: non-finite state after step " + std::to_string(s + 1));
    }
    return z;
}

Tensor rk4_value(const nn::MlpParams& net, const Tensor& z0, double horizon, std::int64_t steps,
                 std::vector<Tensor>* trajectory) {
    if (steps < 1) throw ContractError("rk4: step count must be positive");
    const double h = horizon / static_cast<double>(steps);
    Tensor z = z0;
    if (trajectory) {
        trajectory->clear();
        trajectory->push_back(z);
    }
    for (std::int64_t s = 0; s < steps; ++s) {
        const Tensor k1 = nn::mlp_eval(net, z);
        const Tensor k2 = nn::mlp_eval(net, kern::add(z, kern::scale(k1, h / 2.0)));
        const Tensor k3 = nn::mlp_eval(net, kern::add(z, kern::scale(k2, h / 2.0)));
        const Tensor k4 = nn::mlp_eval(net, kern::add(z, kern::scale(k3, h)));
        const Tensor acc =
            kern::add(kern::add(kern::add(k1, kern::scale(k2, 2.0)), kern::scale(k3, 2.0)), k4);
        z = kern::add(z, kern::scale(acc, h / 6.0));
        if (!z.all_finite())
            throw NumericError("rk4: non-finite state after step " + std::to_string(s + 1));
        if (trajectory) trajectory->push_back(z);
    }
    return z;
}

}  // namespace aros::ode
