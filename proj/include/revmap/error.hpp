#pragma once

#include <stdexcept>
#include <string>

namespace revmap {

// Base for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: mismatched truncation orders, bad file lines, Σ violations.
class invalid_input : public error {
public:
    using error::error;
};

// A mathematical hypothesis of the construction does not hold for the given data
// (β outside (−δ, 0), non-involution, reality violated, point outside the validated region).
class hypothesis_violation : public error {
public:
    using error::error;
};

// Small-divisor failure: |μ^k − 1| below the resonance threshold.
class resonance_error : public hypothesis_violation {
public:
    resonance_error(int order, double divisor)
        : hypothesis_violation("resonance at order k=" + std::to_string(order) +
                               " (|mu^k - 1| = " + std::to_string(divisor) + ")"),
          order_(order), divisor_(divisor) {}

    int order() const noexcept { return order_; }
    double divisor() const noexcept { return divisor_; }

private:
    int order_;
    double divisor_;
};

// Iterative solver failed to reach tolerance.
class convergence_error : public error {
public:
    convergence_error(const std::string &what, double residual)
        : error(what + " (final residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace revmap
