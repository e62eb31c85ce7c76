#include "smd/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace smd {

ModelParams::ModelParams(int n_, double alpha_) : n(n_), alpha(alpha_) {
    if (n < 2)
        throw ValidationError("ModelParams: critical size n must be >= 2, got " + std::to_string(n));
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ValidationError("ModelParams: alpha must be positive and finite");
}

InitialData::InitialData(const ModelParams& params, Tail tail, double c1_0)
    : n_(params.n), c1_0_(c1_0), tail_(std::move(tail)) {
    if (c1_0_ < 0.0 || !std::isfinite(c1_0_))
        throw ValidationError("InitialData: c1_0 must be finite and >= 0");
    if (const auto* pl = std::get_if<PowerLawTail>(&tail_)) {
        if (!(pl->rho > 0.0) || !std::isfinite(pl->rho))
            throw ValidationError("InitialData: power-law rho must be positive");
        if (!(pl->mu > 0.0) || !std::isfinite(pl->mu))
            throw ValidationError("InitialData: power-law mu must be positive");
        if (pl->K_cut < n_)
            throw ValidationError("InitialData: power-law K_cut must be >= n");
    } else if (auto* ex = std::get_if<ExplicitTail>(&tail_)) {
        std::sort(ex->entries.begin(), ex->entries.end());
        for (std::size_t i = 0; i < ex->entries.size(); ++i) {
            const auto& [j, v] = ex->entries[i];
            if (j < n_)
                throw ValidationError("InitialData: explicit entry below critical size n");
            if (v < 0.0 || !std::isfinite(v))
                throw ValidationError("InitialData: explicit entry value must be finite and >= 0");
            if (i > 0 && ex->entries[i - 1].first == j)
                throw ValidationError("InitialData: duplicate explicit entry for j=" + std::to_string(j));
        }
    }
}

const PowerLawTail& InitialData::power_law() const {
    if (const auto* pl = std::get_if<PowerLawTail>(&tail_)) return *pl;
    throw ApplicabilityError("InitialData: operation requires power-law data");
}

double InitialData::c0(std::int64_t j) const {
    if (j < n_) throw DomainError("InitialData::c0: j must be >= n");
    if (std::holds_alternative<MonomerOnlyTail>(tail_)) return 0.0;
    if (const auto* pl = std::get_if<PowerLawTail>(&tail_)) {
        if (j > pl->K_cut) return 0.0;
        return pl->rho * std::pow(static_cast<double>(j), -pl->mu);
    }
    const auto& entries = std::get<ExplicitTail>(tail_).entries;
    auto it = std::lower_bound(entries.begin(), entries.end(), j,
                               [](const auto& e, std::int64_t key) { return e.first < key; });
    if (it != entries.end() && it->first == j) return it->second;
    return 0.0;
}

std::int64_t InitialData::support_max() const {
    if (std::holds_alternative<MonomerOnlyTail>(tail_)) return n_ - 1;
    if (const auto* pl = std::get_if<PowerLawTail>(&tail_)) return pl->K_cut;
    const auto& entries = std::get<ExplicitTail>(tail_).entries;
    return entries.empty() ? n_ - 1 : entries.back().first;
}

InitialData make_power_law(double rho, double mu, std::int64_t K_cut,
                           const ModelParams& params, double c1_0) {
    return InitialData(params, PowerLawTail{rho, mu, K_cut}, c1_0);
}

double nu0(const InitialData& data) {
    // Neumaier-compensated accumulation; the power-law sum runs from the
    // smallest terms (largest j) so the compensation has little to do.
    double sum = 0.0, comp = 0.0;
    auto add = [&](double v) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    };
    if (data.is_monomer_only()) return 0.0;
    if (data.is_power_law()) {
        const auto& pl = data.power_law();
        for (std::int64_t k = pl.K_cut; k >= data.n(); --k)
            add(pl.rho * std::pow(static_cast<double>(k), -pl.mu));
        return sum + comp;
    }
    for (const auto& [j, v] : std::get<ExplicitTail>(data.tail()).entries) add(v);
    return sum + comp;
}

} // namespace smd
