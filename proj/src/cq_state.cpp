#include "qmac/cq_state.hpp"

#include <algorithm>
#include <map>

namespace qmac {

namespace {
constexpr double kWeightTol = 1e-9;
}

CqState::CqState(std::vector<ClassicalReg> cregs, std::vector<QuantumReg> qregs,
                 std::vector<Entry> entries)
    : cregs_(std::move(cregs)), qregs_(std::move(qregs)), entries_(std::move(entries)) {
    qdim_ = 1;
    for (const auto& q : qregs_) qdim_ *= q.dim;
    if (qdim_ > dim_cap()) throw Error::cap("dimension cap exceeded");

    double total = 0.0;
    std::map<std::vector<std::size_t>, int> seen;
    for (const auto& e : entries_) {
        if (e.cvals.size() != cregs_.size())
            throw Error::validation("cq state entry has wrong classical tuple length");
        for (std::size_t i = 0; i < e.cvals.size(); ++i)
            if (e.cvals[i] >= cregs_[i].alphabet)
                throw Error::validation("cq state entry classical value out of alphabet");
        if (e.weight < 0.0)
            throw Error::validation("cq state entry has negative weight");
        if (static_cast<std::size_t>(e.op.rows()) != qdim_ ||
            static_cast<std::size_t>(e.op.cols()) != qdim_)
            throw Error::validation("cq state entry operator dimension mismatch");
        if (++seen[e.cvals] > 1)
            throw Error::validation("cq state has duplicate classical tuple");
        total += e.weight;
    }
    if (std::abs(total - 1.0) > kWeightTol)
        throw Error::validation("cq state weights do not sum to 1");
}

bool CqState::has_register(const std::string& name) const {
    for (const auto& c : cregs_)
        if (c.name == name) return true;
    for (const auto& q : qregs_)
        if (q.name == name) return true;
    return false;
}

double CqState::total_weight() const {
    double t = 0.0;
    for (const auto& e : entries_) t += e.weight;
    return t;
}

CqState CqState::reduce(const std::vector<std::string>& registers) const {
    std::vector<std::size_t> keep_c, keep_q;
    for (const auto& name : registers) {
        bool found = false;
        for (std::size_t i = 0; i < cregs_.size(); ++i)
            if (cregs_[i].name == name) {
                keep_c.push_back(i);
                found = true;
            }
        for (std::size_t i = 0; i < qregs_.size(); ++i)
            if (qregs_[i].name == name) {
                keep_q.push_back(i);
                found = true;
            }
        if (!found) throw Error::validation("register not found: " + name);
    }
    std::sort(keep_c.begin(), keep_c.end());
    std::sort(keep_q.begin(), keep_q.end());

    std::vector<ClassicalReg> new_c;
    for (std::size_t i : keep_c) new_c.push_back(cregs_[i]);
    std::vector<QuantumReg> new_q;
    for (std::size_t i : keep_q) new_q.push_back(qregs_[i]);

    std::vector<std::size_t> qdims;
    for (const auto& q : qregs_) qdims.push_back(q.dim);

    std::size_t new_qdim = 1;
    for (const auto& q : new_q) new_qdim *= q.dim;

    // Accumulate subnormalized operators per kept classical tuple.
    std::map<std::vector<std::size_t>, Matrix> acc;
    for (const auto& e : entries_) {
        if (e.weight <= 0.0) continue;
        std::vector<std::size_t> key;
        key.reserve(keep_c.size());
        for (std::size_t i : keep_c) key.push_back(e.cvals[i]);
        Matrix part;
        if (new_q.empty()) {
            part = Matrix::Constant(1, 1, Complex(1.0, 0.0));
        } else if (keep_q.size() == qregs_.size()) {
            part = e.op;
        } else {
            part = partial_trace_matrix(e.op, qdims, keep_q);
        }
        auto it = acc.find(key);
        if (it == acc.end())
            acc.emplace(key, e.weight * part);
        else
            it->second += e.weight * part;
    }

    std::vector<Entry> new_entries;
    for (auto& [key, op] : acc) {
        double w = op.trace().real();
        if (w <= 0.0) continue;
        Matrix norm = op / w;
        if (new_q.empty()) norm = Matrix::Identity(1, 1);
        new_entries.push_back({key, w, std::move(norm)});
    }
    if (new_q.empty()) {
        // dummy 1-dim quantum part keeps the entry shape uniform
        return CqState(std::move(new_c), {}, std::move(new_entries));
    }
    return CqState(std::move(new_c), std::move(new_q), std::move(new_entries));
}

Matrix CqState::quantum_marginal() const {
    Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(qdim_),
                              static_cast<Eigen::Index>(qdim_));
    for (const auto& e : entries_) sum += e.weight * e.op;
    return sum;
}

double cq_entropy(const CqState& omega, const std::vector<std::string>& registers) {
    if (registers.empty()) return 0.0;
    CqState red = omega.reduce(registers);
    const bool quantum = !red.quantum_registers().empty();
    std::vector<double> weights;
    double h_cond = 0.0;
    for (const auto& e : red.entries()) {
        weights.push_back(e.weight);
        if (quantum && e.weight > 0.0) h_cond += e.weight * von_neumann_entropy(e.op);
    }
    if (red.classical_registers().empty()) {
        // no classical part: entropy of the average quantum state
        return quantum ? von_neumann_entropy(red.quantum_marginal()) : 0.0;
    }
    return shannon_entropy(weights) + h_cond;
}

namespace {
std::vector<std::string> join(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

void check_disjoint(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    for (const auto& x : a)
        for (const auto& y : b)
            if (x == y) throw Error::validation("register overlap: " + x);
}
} // namespace

double cq_mutual_information(const CqState& omega,
                             const std::vector<std::string>& a,
                             const std::vector<std::string>& b,
                             const std::vector<std::string>& c) {
    check_disjoint(a, b);
    check_disjoint(a, c);
    check_disjoint(b, c);
    double h_ac = cq_entropy(omega, join(a, c));
    double h_bc = cq_entropy(omega, join(b, c));
    double h_abc = cq_entropy(omega, join(join(a, b), c));
    double h_c = c.empty() ? 0.0 : cq_entropy(omega, c);
    double mi = h_ac + h_bc - h_abc - h_c;
    if (mi < -1e-8)
        throw Error::internal("mutual information below -1e-8: " + std::to_string(mi));
    return std::max(mi, 0.0);
}

MarkovReport is_markov_chain(const CqState& omega,
                             const std::vector<std::string>& a,
                             const std::vector<std::string>& b,
                             const std::vector<std::string>& c, double tol) {
    double cmi = cq_mutual_information(omega, a, c, b);
    return {cmi <= tol, cmi};
}

} // namespace qmac
