#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathsens/errors.hpp"
#include "pathsens/params.hpp"

namespace pathsens {

enum class ModelKind {
    lj_pairs,       // nonbonded (+ optional bonded) molecular force field
    harmonic_well,  // independent particles in a quadratic well (oracle)
    free_particle,  // no forces
};

struct BondTerm {
    std::int32_t i = 0, j = 0;
};

// Angle j-i-k with i the apex atom.
struct AngleTerm {
    std::int32_t j = 0, i = 0, k = 0;
};

// Parameter-vector slots of one LJ pair class.
struct LJClassSlots {
    std::size_t eps = 0, sigma = 0, rcut = 0;
};

// Static structure of the system: species, masses, molecules, bonded terms
// and the mapping from interactions to parameter-vector slots.
struct Topology {
    ModelKind kind = ModelKind::lj_pairs;

    std::int32_t n_atoms = 0;
    std::vector<std::uint8_t> species;          // per atom
    std::vector<std::string> species_names;
    std::vector<double> masses;                 // per atom
    std::vector<std::int32_t> molecule_of;      // per atom
    std::int32_t n_molecules = 0;

    std::vector<BondTerm> bonds;
    std::vector<AngleTerm> angles;

    // pair_class[s1 * n_species + s2] -> LJ class index, or -1 if none
    std::int32_t n_species = 0;
    std::vector<std::int32_t> pair_class;
    std::vector<LJClassSlots> lj_classes;
    bool exclude_same_molecule = false;

    // bonded / oracle parameter slots
    std::size_t bond_k_slot = 0, bond_r0_slot = 0;
    std::size_t angle_k_slot = 0, angle_theta0_slot = 0;
    std::size_t spring_k_slot = 0;

    std::int32_t lj_class_of(std::uint8_t s1, std::uint8_t s2) const {
        return pair_class[static_cast<std::size_t>(s1) * n_species + s2];
    }

    void check_terms() const {
        for (const auto& b : bonds) {
            if (b.i == b.j || b.i < 0 || b.j < 0 || b.i >= n_atoms || b.j >= n_atoms)
                throw ConfigError("bond term has invalid atom indices");
        }
        for (const auto& a : angles) {
            if (a.i == a.j || a.i == a.k || a.j == a.k || a.i < 0 || a.j < 0 || a.k < 0 ||
                a.i >= n_atoms || a.j >= n_atoms || a.k >= n_atoms)
                throw ConfigError("angle term has invalid atom indices");
        }
    }
};

struct ModelSystem {
    Topology topology;
    ParameterVector parameters;
};

// Single-species LJ fluid in reduced units (epsilon = sigma = m = 1).
inline ModelSystem make_lj_fluid(std::int32_t n_atoms, double epsilon = 1.0,
                                 double sigma = 1.0, double rcut = 4.0) {
    if (n_atoms < 1) throw ConfigError("lj-fluid needs at least one atom");
    Topology t;
    t.kind = ModelKind::lj_pairs;
    t.n_atoms = n_atoms;
    t.species.assign(n_atoms, 0);
    t.species_names = {"A"};
    t.masses.assign(n_atoms, 1.0);
    t.molecule_of.resize(n_atoms);
    for (std::int32_t i = 0; i < n_atoms; ++i) t.molecule_of[i] = i;
    t.n_molecules = n_atoms;
    t.n_species = 1;
    t.pair_class = {0};
    t.lj_classes = {LJClassSlots{0, 1, 2}};

    ParameterVector p({{"epsilon", epsilon, "eps", ParamKind::lj_epsilon},
                       {"sigma", sigma, "sigma", ParamKind::lj_sigma},
                       {"rcut", rcut, "sigma", ParamKind::lj_rcut}});
    return {std::move(t), std::move(p)};
}

// Methane default force field (kcal/mol, Angstrom, amu, radians).
struct MethaneDefaults {
    double eps_cc = 0.0951, sigma_cc = 3.473;
    double eps_ch = 0.0380, sigma_ch = 3.159;
    double eps_hh = 0.0152, sigma_hh = 2.846;
    double rcut = 15.0;
    double kb = 700.0, r0 = 1.1;
    double ktheta = 100.0, theta0 = 1.909;
    double mass_c = 12.011, mass_h = 1.008;
};

// All-atom CH4 liquid: rigid topology of 5 atoms per molecule (1 C + 4 H),
// 4 bonds and 6 angles per molecule, LJ only between different molecules.
inline ModelSystem make_methane(std::int32_t n_molecules,
                                const MethaneDefaults& d = MethaneDefaults{}) {
    if (n_molecules < 1) throw ConfigError("methane needs at least one molecule");
    Topology t;
    t.kind = ModelKind::lj_pairs;
    t.n_atoms = 5 * n_molecules;
    t.n_molecules = n_molecules;
    t.species.resize(t.n_atoms);
    t.masses.resize(t.n_atoms);
    t.molecule_of.resize(t.n_atoms);
    t.species_names = {"C", "H"};
    for (std::int32_t m = 0; m < n_molecules; ++m) {
        const std::int32_t c = 5 * m;
        t.species[c] = 0;
        t.masses[c] = d.mass_c;
        t.molecule_of[c] = m;
        for (int h = 1; h <= 4; ++h) {
            t.species[c + h] = 1;
            t.masses[c + h] = d.mass_h;
            t.molecule_of[c + h] = m;
            t.bonds.push_back({c, c + h});
        }
        for (int a = 1; a <= 4; ++a)
            for (int b = a + 1; b <= 4; ++b)
                t.angles.push_back({c + a, c, c + b});
    }
    t.n_species = 2;
    // species pairs: CC, CH/HC, HH
    t.pair_class = {0, 1, 1, 2};
    t.lj_classes = {LJClassSlots{0, 1, 10}, LJClassSlots{2, 3, 10}, LJClassSlots{4, 5, 10}};
    t.exclude_same_molecule = true;
    t.bond_k_slot = 6;
    t.bond_r0_slot = 7;
    t.angle_k_slot = 8;
    t.angle_theta0_slot = 9;

    ParameterVector p({{"eps_cc", d.eps_cc, "kcal/mol", ParamKind::lj_epsilon},
                       {"sigma_cc", d.sigma_cc, "A", ParamKind::lj_sigma},
                       {"eps_ch", d.eps_ch, "kcal/mol", ParamKind::lj_epsilon},
                       {"sigma_ch", d.sigma_ch, "A", ParamKind::lj_sigma},
                       {"eps_hh", d.eps_hh, "kcal/mol", ParamKind::lj_epsilon},
                       {"sigma_hh", d.sigma_hh, "A", ParamKind::lj_sigma},
                       {"kb", d.kb, "kcal/mol/A^2", ParamKind::bond_k},
                       {"r0", d.r0, "A", ParamKind::bond_r0},
                       {"ktheta", d.ktheta, "kcal/mol/rad^2", ParamKind::angle_k},
                       {"theta0", d.theta0, "rad", ParamKind::angle_theta0},
                       {"rcut", d.rcut, "A", ParamKind::lj_rcut}});
    t.check_terms();
    return {std::move(t), std::move(p)};
}

// Independent particles in the well V = k |q|^2 / 2 (analytic oracle).
inline ModelSystem make_harmonic(std::int32_t n_atoms, double k = 1.0, double mass = 1.0) {
    Topology t;
    t.kind = ModelKind::harmonic_well;
    t.n_atoms = n_atoms;
    t.species.assign(n_atoms, 0);
    t.species_names = {"A"};
    t.masses.assign(n_atoms, mass);
    t.molecule_of.resize(n_atoms);
    for (std::int32_t i = 0; i < n_atoms; ++i) t.molecule_of[i] = i;
    t.n_molecules = n_atoms;
    t.n_species = 1;
    t.pair_class = {-1};
    t.spring_k_slot = 0;
    ParameterVector p({{"k", k, "eps/sigma^2", ParamKind::spring_k}});
    return {std::move(t), std::move(p)};
}

inline ModelSystem make_free(std::int32_t n_atoms, double mass = 1.0) {
    Topology t;
    t.kind = ModelKind::free_particle;
    t.n_atoms = n_atoms;
    t.species.assign(n_atoms, 0);
    t.species_names = {"A"};
    t.masses.assign(n_atoms, mass);
    t.molecule_of.resize(n_atoms);
    for (std::int32_t i = 0; i < n_atoms; ++i) t.molecule_of[i] = i;
    t.n_molecules = n_atoms;
    t.n_species = 1;
    t.pair_class = {-1};
    ParameterVector p({{"mass", mass, "m", ParamKind::other}});
    return {std::move(t), std::move(p)};
}

} // namespace pathsens
