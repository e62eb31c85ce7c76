#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "smd/errors.hpp"

namespace smd {

// Parameters of the deposition model: critical cluster size n and monomer
// input rate alpha. Immutable after construction.
struct ModelParams {
    int n;
    double alpha;

    ModelParams(int n_, double alpha_);
};

// Initial cluster data c_j(0) for j >= n, plus the monomer value c_1(0).
//
// Three kinds:
//   MonomerOnly:   c_j(0) = 0 for all j >= n
//   PowerLaw:      c_j(0) = rho * j^(-mu) for n <= j <= K_cut, 0 beyond
//   Explicit:      a finite list of (j, value) pairs
struct MonomerOnlyTail {};

struct PowerLawTail {
    double rho;   // > 0
    double mu;    // > 0
    std::int64_t K_cut; // >= n
};

struct ExplicitTail {
    // sorted by j, j >= n, values >= 0
    std::vector<std::pair<std::int64_t, double>> entries;
};

class InitialData {
  public:
    using Tail = std::variant<MonomerOnlyTail, PowerLawTail, ExplicitTail>;

    InitialData(const ModelParams& params, Tail tail, double c1_0 = 0.0);

    double c1_0() const { return c1_0_; }
    int n() const { return n_; }
    const Tail& tail() const { return tail_; }

    bool is_monomer_only() const { return std::holds_alternative<MonomerOnlyTail>(tail_); }
    bool is_power_law() const { return std::holds_alternative<PowerLawTail>(tail_); }
    const PowerLawTail& power_law() const;

    // c_j(0) for j >= n. O(1) for power-law, O(log m) for explicit data.
    double c0(std::int64_t j) const;

    // Largest j with c_j(0) != 0, or n-1 if the tail is empty.
    std::int64_t support_max() const;

  private:
    int n_;
    double c1_0_;
    Tail tail_;
};

// Convenience constructor for power-law data.
InitialData make_power_law(double rho, double mu, std::int64_t K_cut,
                           const ModelParams& params, double c1_0 = 0.0);

// nu0 = sum_{j>=n} c_j(0), the total initial cluster count. Compensated sum.
double nu0(const InitialData& data);

} // namespace smd
