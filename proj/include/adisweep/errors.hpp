#pragma once

#include <stdexcept>
#include <string>

namespace adisweep {

// Input rejected before any numerics ran.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical-domain failures share one base so callers can map them to a
// single process exit code.
class numerical_domain_error : public std::domain_error {
public:
    explicit numerical_domain_error(const std::string& what) : std::domain_error(what) {}
};

// |q| left the open interval where sqrt(1-q^2) and its derivatives are safe.
class state_domain_error : public numerical_domain_error {
public:
    explicit state_domain_error(const std::string& what) : numerical_domain_error(what) {}
};

// Linearization determinant too small; the mean-deviation formula diverges
// at a bifurcation point.
class singularity_error : public numerical_domain_error {
public:
    explicit singularity_error(const std::string& what) : numerical_domain_error(what) {}
};

// Stability classification requested exactly at a bifurcation point.
class marginal_stability_error : public numerical_domain_error {
public:
    explicit marginal_stability_error(const std::string& what) : numerical_domain_error(what) {}
};

// Amplitude norm left the conservation band; the integration is not trustworthy.
class norm_drift_error : public numerical_domain_error {
public:
    explicit norm_drift_error(const std::string& what) : numerical_domain_error(what) {}
};

// Energy drifted at constant coupling beyond the integrator bound.
class instability_error : public numerical_domain_error {
public:
    explicit instability_error(const std::string& what) : numerical_domain_error(what) {}
};

// Relative phase of a two-mode state undefined when one amplitude vanishes.
class phase_undefined_error : public numerical_domain_error {
public:
    explicit phase_undefined_error(const std::string& what) : numerical_domain_error(what) {}
};

// Loop of states too coarse for the discrete connection sum.
class loop_sampling_error : public numerical_domain_error {
public:
    explicit loop_sampling_error(const std::string& what) : numerical_domain_error(what) {}
};

// Loop of states does not close.
class loop_closure_error : public numerical_domain_error {
public:
    explicit loop_closure_error(const std::string& what) : numerical_domain_error(what) {}
};

// A sweep crossed the symmetric point without committing to either branch.
class undecided_branch_error : public std::runtime_error {
public:
    explicit undecided_branch_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace adisweep
