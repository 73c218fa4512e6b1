#pragma once

#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "pathsens/errors.hpp"

namespace pathsens {

// Role of a force-field parameter; drives validation and differentiability.
enum class ParamKind {
    lj_epsilon,
    lj_sigma,
    lj_rcut,     // model parameter, but the potential is not differentiable in it
    bond_k,
    bond_r0,
    angle_k,
    angle_theta0,
    spring_k,    // harmonic-well oracle model
    other,
};

inline bool is_differentiable(ParamKind k) { return k != ParamKind::lj_rcut; }

struct ParamEntry {
    std::string name;
    double value = 0.0;
    std::string unit;
    ParamKind kind = ParamKind::other;
};

// Ordered force-field parameter vector theta. Names are unique; lookups are
// by name or index. The differentiable subset (everything except cutoff
// radii) is what Jacobians and the FIM range over.
class ParameterVector {
public:
    ParameterVector() = default;
    explicit ParameterVector(std::vector<ParamEntry> entries) : entries_(std::move(entries)) {
        validate();
    }

    std::size_t size() const { return entries_.size(); }
    const ParamEntry& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<ParamEntry>& entries() const { return entries_; }

    double value(std::size_t i) const { return entries_[i].value; }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i].name == name) return i;
        throw ConfigError("unknown parameter name: " + name);
    }

    bool has(const std::string& name) const {
        for (const auto& e : entries_)
            if (e.name == name) return true;
        return false;
    }

    void set(const std::string& name, double v) {
        entries_[index_of(name)].value = v;
        validate();
    }

    // Copy with entry i shifted by delta; used for perturbation directions.
    ParameterVector with_delta(std::size_t i, double delta) const {
        ParameterVector out = *this;
        out.entries_[i].value += delta;
        out.validate();
        return out;
    }

    // Indices of the differentiable parameters (Jacobian/FIM columns).
    std::vector<std::size_t> differentiable_indices() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (is_differentiable(entries_[i].kind)) idx.push_back(i);
        return idx;
    }

    void validate() const {
        if (entries_.empty()) throw ConfigError("parameter vector must have K >= 1 entries");
        for (std::size_t i = 0; i < entries_.size(); ++i)
            for (std::size_t j = i + 1; j < entries_.size(); ++j)
                if (entries_[i].name == entries_[j].name)
                    throw ConfigError("duplicate parameter name: " + entries_[i].name);
        for (const auto& e : entries_) {
            switch (e.kind) {
            case ParamKind::lj_epsilon:
            case ParamKind::lj_sigma:
            case ParamKind::lj_rcut:
            case ParamKind::bond_k:
            case ParamKind::bond_r0:
            case ParamKind::angle_k:
            case ParamKind::spring_k:
                if (!(e.value > 0.0))
                    throw ConfigError("parameter " + e.name + " must be positive");
                break;
            case ParamKind::angle_theta0:
                if (!(e.value > 0.0 && e.value < std::numbers::pi))
                    throw ConfigError("parameter " + e.name + " must lie in (0, pi)");
                break;
            case ParamKind::other:
                break;
            }
        }
    }

private:
    std::vector<ParamEntry> entries_;
};

} // namespace pathsens
