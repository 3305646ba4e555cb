#pragma once

#include "qmac/density.hpp"

#include <string>
#include <vector>

namespace qmac {

/// Joint classical-quantum state: a weighted list of (classical tuple,
/// density operator over the labeled quantum registers). Classical registers
/// are kept symbolic; they embed as orthogonal basis states only implicitly,
/// through block-diagonal entropy formulas.
class CqState {
public:
    struct ClassicalReg {
        std::string name;
        std::size_t alphabet;
    };
    struct QuantumReg {
        std::string name;
        std::size_t dim;
    };
    struct Entry {
        std::vector<std::size_t> cvals; // one value per classical register
        double weight;                  // >= 0
        Matrix op;                      // normalized state on all quantum regs
    };

    CqState(std::vector<ClassicalReg> cregs, std::vector<QuantumReg> qregs,
            std::vector<Entry> entries);

    const std::vector<ClassicalReg>& classical_registers() const { return cregs_; }
    const std::vector<QuantumReg>& quantum_registers() const { return qregs_; }
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t quantum_dim() const { return qdim_; }

    bool has_register(const std::string& name) const;

    // Reduction to the named registers (classical and/or quantum, any mix).
    CqState reduce(const std::vector<std::string>& registers) const;

    // Joint density operator marginal over the quantum registers only.
    Matrix quantum_marginal() const;

    double total_weight() const;

private:
    std::vector<ClassicalReg> cregs_;
    std::vector<QuantumReg> qregs_;
    std::vector<Entry> entries_;
    std::size_t qdim_;
};

// Entropy in bits of the reduction of omega to the named registers.
// Purely classical sets use Shannon entropy exactly; mixed sets use the
// block-diagonal form H(p) + sum_c p(c) H(rho_c).
double cq_entropy(const CqState& omega, const std::vector<std::string>& registers);

// I(A;B|C) in bits by entropy combination; clamped to 0 in [-1e-8, 0),
// an internal error below -1e-8.
double cq_mutual_information(const CqState& omega,
                             const std::vector<std::string>& a,
                             const std::vector<std::string>& b,
                             const std::vector<std::string>& conditioning = {});

struct MarkovReport {
    bool is_chain;
    double cmi;
};

// true iff I(A;C|B) <= tol; the CMI value is always reported.
MarkovReport is_markov_chain(const CqState& omega,
                             const std::vector<std::string>& a,
                             const std::vector<std::string>& b,
                             const std::vector<std::string>& c, double tol);

} // namespace qmac
