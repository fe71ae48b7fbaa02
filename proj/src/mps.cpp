#include "mpsens/mps.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

namespace mpsens {

// ---------------------------------------------------------------- SiteTensor

SiteTensor::SiteTensor(Index left, Index phys, Index right)
    : slices_(static_cast<std::size_t>(phys), ComplexMatrix::Zero(left, right)) {}

SiteTensor::SiteTensor(std::vector<ComplexMatrix> slices) : slices_(std::move(slices)) {
    if(slices_.empty()) throw DimensionError("SiteTensor: physical dimension must be at least 1");
    for(const auto &m : slices_) {
        if(m.rows() != slices_.front().rows() || m.cols() != slices_.front().cols())
            throw DimensionError("SiteTensor: slices have inconsistent shapes");
    }
}

ComplexMatrix SiteTensor::stacked_rows() const {
    const Index   l = left_dim(), r = right_dim();
    ComplexMatrix m(phys_dim() * l, r);
    for(Index s = 0; s < phys_dim(); ++s) m.middleRows(s * l, l) = (*this)[s];
    return m;
}

ComplexMatrix SiteTensor::stacked_cols() const {
    const Index   l = left_dim(), r = right_dim();
    ComplexMatrix m(l, phys_dim() * r);
    for(Index s = 0; s < phys_dim(); ++s) m.middleCols(s * r, r) = (*this)[s];
    return m;
}

SiteTensor SiteTensor::from_stacked_rows(const ComplexMatrix &m, Index phys) {
    if(phys <= 0 || m.rows() % phys != 0) throw DimensionError("from_stacked_rows: row count is not a multiple of d");
    const Index                l = m.rows() / phys;
    std::vector<ComplexMatrix> slices;
    slices.reserve(static_cast<std::size_t>(phys));
    for(Index s = 0; s < phys; ++s) slices.emplace_back(m.middleRows(s * l, l));
    return SiteTensor(std::move(slices));
}

SiteTensor SiteTensor::from_stacked_cols(const ComplexMatrix &m, Index phys) {
    if(phys <= 0 || m.cols() % phys != 0) throw DimensionError("from_stacked_cols: column count is not a multiple of d");
    const Index                r = m.cols() / phys;
    std::vector<ComplexMatrix> slices;
    slices.reserve(static_cast<std::size_t>(phys));
    for(Index s = 0; s < phys; ++s) slices.emplace_back(m.middleCols(s * r, r));
    return SiteTensor(std::move(slices));
}

ComplexMatrix SiteTensor::left_gram() const {
    ComplexMatrix g = ComplexMatrix::Zero(right_dim(), right_dim());
    for(const auto &a : slices_) g.noalias() += a.adjoint() * a;
    return g;
}

ComplexMatrix SiteTensor::right_gram() const {
    ComplexMatrix g = ComplexMatrix::Zero(left_dim(), left_dim());
    for(const auto &a : slices_) g.noalias() += a * a.adjoint();
    return g;
}

SiteTensor SiteTensor::transposed() const {
    std::vector<ComplexMatrix> t;
    t.reserve(slices_.size());
    for(const auto &a : slices_) t.emplace_back(a.transpose());
    return SiteTensor(std::move(t));
}

double SiteTensor::norm_squared() const {
    double acc = 0;
    for(const auto &a : slices_) acc += a.squaredNorm();
    return acc;
}

double isometry_defect(const SiteTensor &a, Isometry side) {
    const ComplexMatrix g = side == Isometry::left ? a.left_gram() : a.right_gram();
    ComplexMatrix       target = ComplexMatrix::Zero(g.rows(), g.cols());
    for(Index i = 0; i < g.rows(); ++i) target(i, i) = std::real(g(i, i)) > 0.5 ? 1.0 : 0.0;
    return g.rows() == 0 ? 0.0 : (g - target).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------- truncation

TruncatedSvd truncated_svd(const ComplexMatrix &m, const TruncationPolicy &policy, bool renormalize) {
    if(policy.chi_max < 1) throw std::invalid_argument("truncated_svd: chi_max must be at least 1");
    auto        f     = linalg::svd(m);
    const Index n_all = f.s.size();
    const Index n     = std::min(n_all, policy.chi_max);
    const double s0   = f.s(0);
    if(!(s0 > 0)) throw NumericalError(fmt::format("truncated_svd: {}x{} matrix has no non-zero singular value", m.rows(), m.cols()));

    const double total = f.s.squaredNorm();
    Index        keep  = 0;
    while(keep < n && f.s(keep) > policy.zero_tol * s0) ++keep;
    if(policy.cutoff > 0) {
        // Smallest count whose discarded tail weight is within the cutoff.
        double tail = 0;
        Index  m_cut = n_all;
        for(Index j = n_all - 1; j >= 1; --j) {
            tail += f.s(j) * f.s(j);
            if(tail / total > policy.cutoff) break;
            m_cut = j;
        }
        keep = std::min(keep, m_cut);
    }
    keep = std::max<Index>(keep, 1);

    TruncatedSvd out;
    out.nonzero          = keep;
    out.discarded_weight = std::max(0.0, 1.0 - f.s.head(keep).squaredNorm() / total);
    out.u                = ComplexMatrix::Zero(m.rows(), n);
    out.vh               = ComplexMatrix::Zero(n, m.cols());
    out.s                = RealVector::Zero(n);
    out.u.leftCols(keep)  = f.u.leftCols(keep);
    out.vh.topRows(keep)  = f.v.leftCols(keep).adjoint();
    out.s.head(keep)      = f.s.head(keep);
    if(renormalize) out.s /= out.s.norm();
    return out;
}

// ---------------------------------------------------------------- MpsState

MpsState MpsState::product(std::span<const ComplexVector> local_vectors, double tol) {
    if(local_vectors.empty()) throw std::invalid_argument("product state needs at least one site");
    MpsState st;
    st.d_ = local_vectors.front().size();
    for(const auto &v : local_vectors) {
        if(v.size() != st.d_) throw DimensionError("product state: local vectors have different dimensions");
        if(std::abs(v.norm() - 1.0) > tol)
            throw std::invalid_argument(fmt::format("product state: local vector has norm {:.12f}", v.norm()));
        SiteTensor t(1, st.d_, 1);
        for(Index s = 0; s < st.d_; ++s) t[s](0, 0) = v(s);
        st.sites_.push_back(std::move(t));
    }
    st.center_ = 0;
    return st;
}

MpsState MpsState::zeros(Index n, Index d) {
    ComplexVector e0 = ComplexVector::Zero(d);
    e0(0)            = 1.0;
    std::vector<ComplexVector> local(static_cast<std::size_t>(n), e0);
    return product(local);
}

MpsState MpsState::from_tensors(std::vector<SiteTensor> tensors, std::optional<Index> center) {
    if(tensors.empty()) throw std::invalid_argument("from_tensors: empty chain");
    MpsState st;
    st.d_ = tensors.front().phys_dim();
    for(std::size_t i = 0; i < tensors.size(); ++i) {
        if(tensors[i].phys_dim() != st.d_) throw DimensionError("from_tensors: inconsistent local dimension");
        if(i > 0 && tensors[i - 1].right_dim() != tensors[i].left_dim())
            throw DimensionError(fmt::format("from_tensors: bond {} dimensions disagree", i - 1));
    }
    if(tensors.front().left_dim() != 1 || tensors.back().right_dim() != 1)
        throw DimensionError("from_tensors: boundary bond dimensions must be 1");
    st.sites_  = std::move(tensors);
    st.center_ = center;
    return st;
}

MpsState MpsState::uniform(std::vector<SiteTensor> cell) {
    if(cell.empty()) throw std::invalid_argument("uniform: empty unit cell");
    MpsState st;
    st.d_ = cell.front().phys_dim();
    for(std::size_t i = 0; i < cell.size(); ++i) {
        const auto &next = cell[(i + 1) % cell.size()];
        if(cell[i].right_dim() != next.left_dim()) throw DimensionError("uniform: unit cell bonds do not close");
        if(cell[i].phys_dim() != st.d_) throw DimensionError("uniform: inconsistent local dimension");
    }
    st.sites_   = std::move(cell);
    st.uniform_ = true;
    return st;
}

Index MpsState::bond_dim(Index bond) const {
    if(bond < 0 || bond >= size()) throw std::out_of_range(fmt::format("bond {} out of range", bond));
    return site(bond).right_dim();
}

Index MpsState::max_bond_dim() const {
    Index chi = 1;
    for(const auto &t : sites_) chi = std::max({chi, t.left_dim(), t.right_dim()});
    return chi;
}

void MpsState::require_finite_chain(const char *op) const {
    if(uniform_) throw std::logic_error(fmt::format("{}: not defined for a uniform state", op));
    if(sites_.empty()) throw std::logic_error(fmt::format("{}: empty state", op));
}

void MpsState::step_right(Index c) {
    auto      &a  = sites_[static_cast<std::size_t>(c)];
    auto      &b  = sites_[static_cast<std::size_t>(c + 1)];
    const Index chi = a.right_dim();
    auto       f  = truncated_svd(a.stacked_rows(), {}, false);
    const Index n = f.s.size();
    ComplexMatrix u  = ComplexMatrix::Zero(f.u.rows(), chi);
    ComplexMatrix sv = ComplexMatrix::Zero(chi, chi);
    u.leftCols(n)    = f.u;
    sv.topRows(n)    = f.s.cast<cplx>().asDiagonal() * f.vh;
    a                = SiteTensor::from_stacked_rows(u, d_);
    for(Index s = 0; s < d_; ++s) b[s] = sv * b[s];
}

void MpsState::step_left(Index c) {
    auto      &a  = sites_[static_cast<std::size_t>(c)];
    auto      &b  = sites_[static_cast<std::size_t>(c - 1)];
    const Index chi = a.left_dim();
    auto       f  = truncated_svd(a.stacked_cols(), {}, false);
    const Index n = f.s.size();
    ComplexMatrix vh = ComplexMatrix::Zero(chi, f.vh.cols());
    ComplexMatrix us = ComplexMatrix::Zero(chi, chi);
    vh.topRows(n)    = f.vh;
    us.leftCols(n)   = f.u * f.s.cast<cplx>().asDiagonal();
    a                = SiteTensor::from_stacked_cols(vh, d_);
    for(Index s = 0; s < d_; ++s) b[s] = b[s] * us;
}

void MpsState::move_center(Index target) {
    require_finite_chain("move_center");
    if(target < 0 || target >= size()) throw std::out_of_range(fmt::format("move_center: site {} out of range", target));
    if(!center_) {
        canonicalize(target);
        return;
    }
    Index c = *center_;
    while(c < target) step_right(c++);
    while(c > target) step_left(c--);
    center_ = target;
}

void MpsState::canonicalize(Index center) {
    require_finite_chain("canonicalize");
    if(center < 0 || center >= size()) throw std::out_of_range(fmt::format("canonicalize: site {} out of range", center));
    for(Index c = 0; c + 1 < size(); ++c) step_right(c);
    for(Index c = size() - 1; c > center; --c) step_left(c);
    center_ = center;
}

SchmidtCut MpsState::apply_two_site_gate(const ComplexMatrix &gate, Index site, const TruncationPolicy &policy) {
    require_finite_chain("apply_two_site_gate");
    if(site < 0 || site + 1 >= size()) throw std::out_of_range(fmt::format("apply_two_site_gate: invalid site {}", site));
    const Index dd = d_ * d_;
    if(gate.rows() != dd || gate.cols() != dd)
        throw DimensionError(fmt::format("apply_two_site_gate: gate is {}x{}, expected {}x{}", gate.rows(), gate.cols(), dd, dd));
    if(linalg::unitarity_defect(gate) > 1e-10) throw std::invalid_argument("apply_two_site_gate: gate is not unitary");
    if(!center_ || (*center_ != site && *center_ != site + 1))
        throw std::logic_error("apply_two_site_gate: orthogonality center must be on one of the two sites");

    auto       &a  = sites_[static_cast<std::size_t>(site)];
    auto       &b  = sites_[static_cast<std::size_t>(site + 1)];
    const Index cl = a.left_dim(), cr = b.right_dim();

    const ComplexMatrix theta = a.stacked_rows() * b.stacked_cols();
    ComplexMatrix       out   = ComplexMatrix::Zero(theta.rows(), theta.cols());
    for(Index t1 = 0; t1 < d_; ++t1)
        for(Index t2 = 0; t2 < d_; ++t2) {
            auto blk = out.block(t1 * cl, t2 * cr, cl, cr);
            for(Index s1 = 0; s1 < d_; ++s1)
                for(Index s2 = 0; s2 < d_; ++s2) {
                    const cplx g = gate(t1 * d_ + t2, s1 * d_ + s2);
                    if(g != cplx(0.0)) blk += g * theta.block(s1 * cl, s2 * cr, cl, cr);
                }
        }

    auto f  = truncated_svd(out, policy, true);
    a       = SiteTensor::from_stacked_rows(f.u, d_);
    b       = SiteTensor::from_stacked_cols(f.s.cast<cplx>().asDiagonal() * f.vh, d_);
    center_ = site + 1;
    return {site, f.s, f.discarded_weight};
}

void MpsState::truncate(const TruncationPolicy &policy) {
    require_finite_chain("truncate");
    move_center(size() - 1);
    for(Index c = size() - 1; c > 0; --c) {
        auto &a = sites_[static_cast<std::size_t>(c)];
        auto &b = sites_[static_cast<std::size_t>(c - 1)];
        auto  f = truncated_svd(a.stacked_cols(), policy, true);
        a       = SiteTensor::from_stacked_cols(f.vh, d_);
        const ComplexMatrix us = f.u * f.s.cast<cplx>().asDiagonal();
        for(Index s = 0; s < d_; ++s) b[s] = b[s] * us;
    }
    center_ = 0;
}

std::vector<double> MpsState::site_probabilities(Index site) const {
    require_finite_chain("site_probabilities");
    if(!center_ || *center_ != site) throw std::logic_error("site_probabilities: orthogonality center must be on the site");
    std::vector<double> p(static_cast<std::size_t>(d_));
    for(Index s = 0; s < d_; ++s) p[static_cast<std::size_t>(s)] = this->site(site)[s].squaredNorm();
    return p;
}

Index MpsState::measure_site(Index site, CounterRng &rng) {
    const auto   p     = site_probabilities(site);
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if(std::abs(total - 1.0) > 1e-8)
        throw NumericalError(fmt::format("measure_site: probabilities sum to {:.12f} at site {}", total, site));
    const double u   = rng.uniform() * total;
    double       acc = 0;
    Index        out = d_ - 1;
    for(Index s = 0; s < d_; ++s) {
        acc += p[static_cast<std::size_t>(s)];
        if(u < acc) {
            out = s;
            break;
        }
    }
    // Never select a zero-probability branch because of rounding in `acc`.
    while(p[static_cast<std::size_t>(out)] <= 0 && out > 0) --out;
    project_site(site, out);
    return out;
}

void MpsState::project_site(Index site, Index outcome) {
    require_finite_chain("project_site");
    if(!center_ || *center_ != site) throw std::logic_error("project_site: orthogonality center must be on the site");
    if(outcome < 0 || outcome >= d_) throw std::out_of_range("project_site: invalid outcome");
    auto        &t    = sites_[static_cast<std::size_t>(site)];
    const double prob = t[outcome].squaredNorm();
    if(!(prob > 0)) throw NumericalError(fmt::format("project_site: outcome {} has zero probability", outcome));
    for(Index s = 0; s < d_; ++s) {
        if(s == outcome)
            t[s] /= std::sqrt(prob);
        else
            t[s].setZero();
    }
}

SchmidtCut MpsState::schmidt_values(Index bond) const {
    require_finite_chain("schmidt_values");
    if(bond < 0 || bond + 1 >= size()) throw std::out_of_range(fmt::format("schmidt_values: invalid cut {}", bond));
    if(!center_ || (*center_ != bond && *center_ != bond + 1))
        throw std::logic_error("schmidt_values: orthogonality center must be adjacent to the cut");
    const ComplexMatrix m = *center_ == bond ? site(bond).stacked_rows() : site(bond + 1).stacked_cols();
    return {bond, linalg::svd(m).s, 0.0};
}

// ---------------------------------------------------------------- free functions

MpsState product_state(Index n, Index d, std::span<const ComplexVector> local_vectors) {
    if(static_cast<Index>(local_vectors.size()) != n) throw DimensionError("product_state: need one local vector per site");
    for(const auto &v : local_vectors)
        if(v.size() != d) throw DimensionError("product_state: local vector has the wrong dimension");
    return MpsState::product(local_vectors);
}

MpsState canonicalize(MpsState state, Index center) {
    state.canonicalize(center);
    return state;
}

double renyi_from_schmidt(const RealVector &s, double k) {
    if(k < 1) throw std::invalid_argument("renyi entropy order must be >= 1");
    const double total = s.squaredNorm();
    if(!(total > 0)) throw NumericalError("renyi entropy of a zero state");
    if(k == 1.0) {
        double acc = 0;
        for(Index i = 0; i < s.size(); ++i) {
            const double p = s(i) * s(i) / total;
            if(p > 0) acc -= p * std::log(p);
        }
        return acc;
    }
    double acc = 0;
    for(Index i = 0; i < s.size(); ++i) acc += std::pow(s(i) * s(i) / total, k);
    return std::log(acc) / (1.0 - k);
}

double renyi_entropy(const MpsState &state, Index cut, double k) { return renyi_from_schmidt(state.schmidt_values(cut).values, k); }

cplx overlap(const MpsState &a, const MpsState &b) {
    if(a.is_uniform() || b.is_uniform()) throw std::logic_error("overlap: finite states only");
    if(a.size() != b.size() || a.local_dim() != b.local_dim()) throw DimensionError("overlap: states have different shapes");
    ComplexMatrix env = ComplexMatrix::Ones(1, 1);
    for(Index i = 0; i < a.size(); ++i) {
        ComplexMatrix next = ComplexMatrix::Zero(a.site(i).right_dim(), b.site(i).right_dim());
        for(Index s = 0; s < a.local_dim(); ++s) next.noalias() += a.site(i)[s].adjoint() * env * b.site(i)[s];
        env = std::move(next);
    }
    return env(0, 0);
}

double norm(const MpsState &state) { return std::sqrt(std::real(overlap(state, state))); }

double fidelity(const MpsState &a, const MpsState &b) {
    const double na = std::real(overlap(a, a)), nb = std::real(overlap(b, b));
    return std::norm(overlap(a, b)) / (na * nb);
}

ComplexVector to_statevector(const MpsState &state) {
    if(state.is_uniform()) throw std::logic_error("to_statevector: finite states only");
    const double entries = std::pow(static_cast<double>(state.local_dim()), static_cast<double>(state.size()));
    if(entries > static_cast<double>(1 << 24)) throw BudgetExceeded("to_statevector: more than 2^24 amplitudes");
    const Index   d   = state.local_dim();
    ComplexMatrix acc = ComplexMatrix::Ones(1, 1); // rows: configurations so far, cols: open bond
    for(Index i = 0; i < state.size(); ++i) {
        const auto   &t = state.site(i);
        ComplexMatrix next(acc.rows() * d, t.right_dim());
        for(Index r = 0; r < acc.rows(); ++r)
            for(Index s = 0; s < d; ++s) next.row(r * d + s) = acc.row(r) * t[s];
        acc = std::move(next);
    }
    return acc.col(0);
}

} // namespace mpsens
