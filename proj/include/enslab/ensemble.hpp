// Initial-condition ensembles around observations and their propagation
// under a model to all lead times.
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "enslab/errors.hpp"
#include "enslab/models.hpp"
#include "enslab/rng.hpp"

namespace enslab {

struct EnsembleConfig {
    std::size_t n_members = 9;
    double kappa = 0.0;      // perturbation SD, state units
    std::size_t max_lead = 8;
};

struct EnsembleForecast {
    ModelId model = ModelId::I;
    std::int64_t launch_time = 0;
    std::size_t n_members = 0;
    std::size_t max_lead = 0;
    std::vector<double> members;  // (member, lead), lead-minor

    // lead is 1-based, matching forecast lead time
    double at(std::size_t member, std::size_t lead) const {
        return members[member * max_lead + (lead - 1)];
    }
};

// N_e draws of obs + N(0, kappa^2), each redrawn until positive.
inline std::vector<double> make_ensemble(double obs, const EnsembleConfig& config,
                                         std::uint64_t rng_seed) {
    if (!(obs > 0.0)) throw std::invalid_argument("make_ensemble: obs must be > 0");
    if (config.n_members < 1) throw std::invalid_argument("make_ensemble: n_members must be >= 1");
    if (!(config.kappa > 0.0)) throw std::invalid_argument("make_ensemble: kappa must be > 0");
    auto eng = make_engine(rng_seed);
    std::vector<double> initials(config.n_members);
    for (auto& v : initials) v = normal_positive(eng, obs, config.kappa);
    return initials;
}

// Member (i, tau) is tau applications of the model map to initial i.
// Domain violations surface as DivergenceError carrying (member, lead).
template <typename Stepper>
EnsembleForecast propagate_with(Stepper&& step_fn, ModelId id,
                                const std::vector<double>& initials,
                                std::size_t max_lead, std::int64_t launch_time = 0) {
    if (initials.empty()) throw std::invalid_argument("propagate: initials must be nonempty");
    if (max_lead < 1) throw std::invalid_argument("propagate: max_lead must be >= 1");
    EnsembleForecast f;
    f.model = id;
    f.launch_time = launch_time;
    f.n_members = initials.size();
    f.max_lead = max_lead;
    f.members.resize(initials.size() * max_lead);
    for (std::size_t i = 0; i < initials.size(); ++i) {
        double x = initials[i];
        for (std::size_t tau = 0; tau < max_lead; ++tau) {
            try {
                x = step_fn(x);
            } catch (const std::domain_error& e) {
                throw DivergenceError(i, tau + 1,
                                      std::string("ensemble member left the model domain: ") + e.what());
            }
            if (!std::isfinite(x))
                throw DivergenceError(i, tau + 1, "ensemble member diverged to non-finite value");
            f.members[i * max_lead + tau] = x;
        }
    }
    return f;
}

inline EnsembleForecast propagate(const ModelBank& bank, ModelId id,
                                  const std::vector<double>& initials,
                                  std::size_t max_lead, std::int64_t launch_time = 0) {
    return propagate_with([&](double x) { return model_step(bank, id, x); }, id, initials,
                          max_lead, launch_time);
}

}  // namespace enslab
