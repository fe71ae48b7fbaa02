#include "mpsens/oracle/statevector.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>

namespace mpsens::oracle {

namespace {
    Index ipow(Index b, Index e) {
        Index v = 1;
        while(e-- > 0) v *= b;
        return v;
    }
} // namespace

Statevector::Statevector(Index n, Index d) : n_(n), d_(d), psi_(ComplexVector::Zero(ipow(d, n))) {
    if(n > 20) throw BudgetExceeded("Statevector: more than 20 sites");
    psi_(0) = 1.0;
}

void Statevector::apply_two_site(const ComplexMatrix &gate, Index site) {
    const Index left = ipow(d_, site), right = ipow(d_, n_ - site - 2), dd = d_ * d_;
    ComplexVector in(dd);
    for(Index l = 0; l < left; ++l)
        for(Index r = 0; r < right; ++r) {
            for(Index s = 0; s < dd; ++s) in(s) = psi_((l * dd + s) * right + r);
            const ComplexVector out = gate * in;
            for(Index s = 0; s < dd; ++s) psi_((l * dd + s) * right + r) = out(s);
        }
}

std::vector<double> Statevector::probabilities(Index site) const {
    const Index         right = ipow(d_, n_ - site - 1);
    std::vector<double> p(static_cast<std::size_t>(d_), 0.0);
    for(Index i = 0; i < psi_.size(); ++i) p[static_cast<std::size_t>((i / right) % d_)] += std::norm(psi_(i));
    return p;
}

Index Statevector::measure(Index site, CounterRng &rng) {
    const auto   p     = probabilities(site);
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    const double u     = rng.uniform() * total;
    double       acc   = 0;
    Index        out   = d_ - 1;
    for(Index s = 0; s < d_; ++s) {
        acc += p[static_cast<std::size_t>(s)];
        if(u < acc) {
            out = s;
            break;
        }
    }
    while(p[static_cast<std::size_t>(out)] <= 0 && out > 0) --out;
    project(site, out);
    return out;
}

void Statevector::project(Index site, Index outcome) {
    const Index right = ipow(d_, n_ - site - 1);
    for(Index i = 0; i < psi_.size(); ++i)
        if((i / right) % d_ != outcome) psi_(i) = 0.0;
    psi_ /= psi_.norm();
}

ComplexMatrix Statevector::reduced_density(const std::vector<Index> &keep) const {
    std::vector<bool> kept(static_cast<std::size_t>(n_), false);
    for(Index s : keep) kept[static_cast<std::size_t>(s)] = true;
    const Index   nk = static_cast<Index>(keep.size());
    ComplexMatrix m  = ComplexMatrix::Zero(ipow(d_, nk), ipow(d_, n_ - nk));
    for(Index i = 0; i < psi_.size(); ++i) {
        Index row = 0, col = 0, rest = i;
        std::vector<Index> digits(static_cast<std::size_t>(n_));
        for(Index s = n_ - 1; s >= 0; --s) {
            digits[static_cast<std::size_t>(s)] = rest % d_;
            rest /= d_;
        }
        for(Index s = 0; s < n_; ++s) {
            if(kept[static_cast<std::size_t>(s)])
                row = row * d_ + digits[static_cast<std::size_t>(s)];
            else
                col = col * d_ + digits[static_cast<std::size_t>(s)];
        }
        m(row, col) = psi_(i);
    }
    return m * m.adjoint();
}

OracleTrajectory run_circuit(const CircuitSpec &spec) {
    spec.validate();
    auto             streams = RealizationStreams::make(spec.seed, spec.realization);
    OracleTrajectory out{Statevector(spec.n_sites, spec.d), {}};
    const Index      dd = spec.d * spec.d;
    const bool       ti = spec.family == Family::brickwork_ti;
    ComplexMatrix    fixed[2];
    if(ti && spec.ti_mode == TiMode::single_gate) fixed[0] = fixed[1] = haar_unitary(dd, streams.gates);
    if(ti && spec.ti_mode == TiMode::two_gate_cell) {
        fixed[0] = haar_unitary(dd, streams.gates);
        fixed[1] = haar_unitary(dd, streams.gates);
    }
    for(Index layer = 0; layer < spec.layers(); ++layer) {
        ComplexMatrix shared;
        if(ti && spec.ti_mode == TiMode::shared_per_layer) shared = haar_unitary(dd, streams.gates);
        for(Index i = layer % 2; i + 1 < spec.n_sites; i += 2) {
            ComplexMatrix g;
            if(!ti)
                g = haar_unitary(dd, streams.gates);
            else if(spec.ti_mode == TiMode::shared_per_layer)
                g = shared;
            else
                g = fixed[layer % 2];
            out.state.apply_two_site(g, i);
        }
        if(spec.family != Family::monitored) continue;
        for(Index i = 0; i < spec.n_sites; ++i)
            if(streams.coins.bernoulli(spec.p)) out.outcomes.push_back(out.state.measure(i, streams.outcomes));
    }
    return out;
}

double renyi_trace(const ComplexMatrix &rho, int k) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    double acc = 0;
    for(Index i = 0; i < es.eigenvalues().size(); ++i) acc += std::pow(std::max(es.eigenvalues()(i), 0.0), k);
    return acc;
}

double mutual_information(const Statevector &psi, const std::vector<Index> &a, const std::vector<Index> &b, int k) {
    std::vector<Index> ab(a);
    ab.insert(ab.end(), b.begin(), b.end());
    std::sort(ab.begin(), ab.end());
    const double tab = renyi_trace(psi.reduced_density(ab), k);
    const double ta  = renyi_trace(psi.reduced_density(a), k);
    const double tb  = renyi_trace(psi.reduced_density(b), k);
    return std::log(tab / (ta * tb)) / (k - 1);
}

} // namespace mpsens::oracle
