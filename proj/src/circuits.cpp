#include "mpsens/circuits.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace mpsens {

std::string to_string(Family f) {
    switch(f) {
        case Family::rmps: return "rmps";
        case Family::brickwork_ti: return "brickwork_ti";
        case Family::brickwork: return "brickwork";
        case Family::monitored: return "monitored";
    }
    return "?";
}

std::string to_string(TruncationMode m) { return m == TruncationMode::per_gate ? "per_gate" : "per_layer"; }

std::string to_string(TiMode m) {
    switch(m) {
        case TiMode::shared_per_layer: return "shared_per_layer";
        case TiMode::single_gate: return "single_gate";
        case TiMode::two_gate_cell: return "two_gate_cell";
    }
    return "?";
}

Family parse_family(const std::string &s) {
    if(s == "rmps") return Family::rmps;
    if(s == "brickwork_ti" || s == "ti") return Family::brickwork_ti;
    if(s == "brickwork") return Family::brickwork;
    if(s == "monitored") return Family::monitored;
    throw std::invalid_argument(fmt::format("unknown family '{}'", s));
}

TruncationMode parse_truncation_mode(const std::string &s) {
    if(s == "per_gate") return TruncationMode::per_gate;
    if(s == "per_layer") return TruncationMode::per_layer;
    throw std::invalid_argument(fmt::format("unknown truncation mode '{}'", s));
}

TiMode parse_ti_mode(const std::string &s) {
    if(s == "shared_per_layer") return TiMode::shared_per_layer;
    if(s == "single_gate") return TiMode::single_gate;
    if(s == "two_gate_cell") return TiMode::two_gate_cell;
    throw std::invalid_argument(fmt::format("unknown TI mode '{}'", s));
}

void CircuitSpec::validate() const {
    if(d < 2) throw std::invalid_argument("local dimension d must be at least 2");
    if(chi < 1) throw std::invalid_argument("chi must be at least 1");
    if(!uniform && n_sites < 2) throw std::invalid_argument("a finite chain needs at least 2 sites");
    if(!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(fmt::format("p = {} is outside [0, 1]", p));
    if(p > 0.0 && family != Family::monitored) throw std::invalid_argument("p > 0 requires the monitored family");
    if(depth && *depth < 0) throw std::invalid_argument("depth must be non-negative");
    if(!(cutoff >= 0.0 && cutoff < 1.0)) throw std::invalid_argument("cutoff must lie in [0, 1)");
    if(uniform && family != Family::rmps && family != Family::brickwork_ti)
        throw std::invalid_argument("the uniform protocol exists only for rmps and brickwork_ti");
}

ComplexMatrix haar_unitary(Index dim, CounterRng &rng) {
    if(dim < 1) throw std::invalid_argument("haar_unitary: dimension must be at least 1");
    ComplexMatrix g(dim, dim);
    // Column-major fill order is part of the reproducibility contract.
    for(Index j = 0; j < dim; ++j)
        for(Index i = 0; i < dim; ++i) g(i, j) = rng.complex_normal();
    return linalg::qr_unitary(g);
}

namespace {

    SiteTensor rmps_tensor(Index chi_l, Index d, Index chi_r, CounterRng &rng) {
        const ComplexMatrix u = haar_unitary(d * chi_r, rng);
        return SiteTensor::from_stacked_cols(u.topRows(chi_l), d);
    }

    Index capped_pow(Index d, Index e, Index cap) {
        Index v = 1;
        for(Index i = 0; i < e && v < cap; ++i) v *= d;
        return std::min(v, cap);
    }

    /// Gate supply for brickwork layers; consumes the gates stream in a fixed order.
    class GateSource {
      public:
        GateSource(const CircuitSpec &spec, CounterRng &rng) : spec_(spec), rng_(rng) {
            const Index dd = spec.d * spec.d;
            if(spec.family == Family::brickwork_ti) {
                if(spec.ti_mode == TiMode::single_gate) {
                    fixed_[0] = haar_unitary(dd, rng_);
                    fixed_[1] = fixed_[0];
                } else if(spec.ti_mode == TiMode::two_gate_cell) {
                    fixed_[0] = haar_unitary(dd, rng_);
                    fixed_[1] = haar_unitary(dd, rng_);
                }
            }
        }

        void begin_layer(Index layer) {
            layer_ = layer;
            if(spec_.family == Family::brickwork_ti && spec_.ti_mode == TiMode::shared_per_layer)
                shared_ = haar_unitary(spec_.d * spec_.d, rng_);
        }

        ComplexMatrix next() {
            if(spec_.family != Family::brickwork_ti) return haar_unitary(spec_.d * spec_.d, rng_);
            if(spec_.ti_mode == TiMode::shared_per_layer) return shared_;
            return fixed_[layer_ % 2];
        }

      private:
        const CircuitSpec &spec_;
        CounterRng        &rng_;
        Index              layer_ = 0;
        ComplexMatrix      shared_;
        ComplexMatrix      fixed_[2];
    };

    const TruncationPolicy untruncated{std::numeric_limits<Index>::max(), 0.0, 1e-13};

    Trajectory run_circuit(const CircuitSpec &spec, RealizationStreams &streams, GateLog *log, bool measure) {
        spec.validate();
        if(spec.uniform) throw std::invalid_argument("finite circuit requested with uniform = true");
        Trajectory out;
        out.state        = MpsState::zeros(spec.n_sites, spec.d);
        auto      &st    = out.state;
        const Index n    = spec.n_sites;
        const auto  pol  = spec.policy();
        const bool  gate_trunc = spec.truncation == TruncationMode::per_gate;
        GateSource  source(spec, streams.gates);

        for(Index layer = 0; layer < spec.layers(); ++layer) {
            source.begin_layer(layer);
            for(Index i = layer % 2; i + 1 < n; i += 2) {
                ComplexMatrix g = source.next();
                st.move_center(i);
                st.apply_two_site_gate(g, i, gate_trunc ? pol : untruncated);
                if(log) log->push_back({layer, i, std::move(g)});
            }
            if(!gate_trunc) st.truncate(pol);
            if(!measure) continue;
            for(Index i = 0; i < n; ++i) {
                // One coin per site and layer, drawn whether or not p > 0.
                if(!streams.coins.bernoulli(spec.p)) continue;
                st.move_center(i);
                const Index outcome = st.measure_site(i, streams.outcomes);
                out.measurements.push_back({layer, i, outcome});
            }
        }
        return out;
    }

    // ---------------------------------------------------------------- uniform two-site cell

    struct VidalCell {
        SiteTensor b[2];      // right-canonical tensors
        RealVector lambda[2]; // lambda[0]: bond before b[0], lambda[1]: bond between b[0] and b[1]
    };

    // Update on bond (x, y) where lambda_left sits on the bond before x. Avoids
    // inverting Schmidt values by contracting the evolved pair with y'^dagger.
    void itebd_update(SiteTensor &x, SiteTensor &y, const RealVector &lambda_left, RealVector &lambda_mid,
                      const ComplexMatrix &gate, const TruncationPolicy &pol) {
        const Index   d  = x.phys_dim();
        const Index   cl = x.left_dim(), cr = y.right_dim();
        ComplexMatrix theta = x.stacked_rows() * y.stacked_cols();
        ComplexMatrix psi   = ComplexMatrix::Zero(theta.rows(), theta.cols());
        for(Index t1 = 0; t1 < d; ++t1)
            for(Index t2 = 0; t2 < d; ++t2) {
                auto blk = psi.block(t1 * cl, t2 * cr, cl, cr);
                for(Index s1 = 0; s1 < d; ++s1)
                    for(Index s2 = 0; s2 < d; ++s2) blk += gate(t1 * d + t2, s1 * d + s2) * theta.block(s1 * cl, s2 * cr, cl, cr);
            }
        ComplexMatrix weighted = psi;
        for(Index s = 0; s < d; ++s) weighted.middleRows(s * cl, cl) = lambda_left.cast<cplx>().asDiagonal() * psi.middleRows(s * cl, cl);
        auto f     = truncated_svd(weighted, pol, true);
        y          = SiteTensor::from_stacked_cols(f.vh, d);
        x          = SiteTensor::from_stacked_rows(psi * f.vh.adjoint(), d);
        lambda_mid = f.s;
    }

    Eigen::MatrixXcd apply_left_map(const SiteTensor &a, const ComplexMatrix &l) {
        ComplexMatrix out = ComplexMatrix::Zero(a.right_dim(), a.right_dim());
        for(Index s = 0; s < a.phys_dim(); ++s) out.noalias() += a[s].adjoint() * l * a[s];
        return out;
    }

} // namespace

MpsState build_rmps(Index n, Index chi, Index d, CounterRng &rng, bool uniform) {
    if(chi < 1 || d < 2) throw std::invalid_argument("build_rmps: need chi >= 1 and d >= 2");
    if(uniform) return MpsState::uniform({rmps_tensor(chi, d, chi, rng)});
    if(n < 1) throw std::invalid_argument("build_rmps: need at least one site");
    std::vector<SiteTensor> sites;
    sites.reserve(static_cast<std::size_t>(n));
    Index left = 1;
    for(Index i = 0; i < n; ++i) {
        const Index right = capped_pow(d, n - 1 - i, chi);
        sites.push_back(rmps_tensor(left, d, right, rng));
        left = right;
    }
    return MpsState::from_tensors(std::move(sites), 0);
}

MpsState run_brickwork(const CircuitSpec &spec, RealizationStreams &streams, GateLog *log) {
    if(spec.family != Family::brickwork && spec.family != Family::brickwork_ti)
        throw std::invalid_argument("run_brickwork: family must be brickwork or brickwork_ti");
    return run_circuit(spec, streams, log, false).state;
}

Trajectory run_monitored(const CircuitSpec &spec, RealizationStreams &streams, GateLog *log) {
    if(spec.family != Family::monitored) throw std::invalid_argument("run_monitored: family must be monitored");
    return run_circuit(spec, streams, log, true);
}

MpsState run_uniform_ti(const CircuitSpec &spec, RealizationStreams &streams, GateLog *log) {
    spec.validate();
    if(spec.family == Family::rmps) return build_rmps(1, spec.chi, spec.d, streams.gates, true);
    if(spec.family != Family::brickwork_ti) throw std::invalid_argument("run_uniform_ti: family must be rmps or brickwork_ti");

    const Index d = spec.d;
    VidalCell   c;
    for(auto &t : c.b) {
        t       = SiteTensor(1, d, 1);
        t[0](0, 0) = 1.0;
    }
    c.lambda[0] = c.lambda[1] = RealVector::Ones(1);
    GateSource source(spec, streams.gates);
    const auto pol = spec.policy();
    for(Index layer = 0; layer < spec.layers(); ++layer) {
        source.begin_layer(layer);
        ComplexMatrix g = source.next();
        if(layer % 2 == 0)
            itebd_update(c.b[0], c.b[1], c.lambda[0], c.lambda[1], g, pol);
        else
            itebd_update(c.b[1], c.b[0], c.lambda[1], c.lambda[0], g, pol);
        if(log) log->push_back({layer, layer % 2, std::move(g)});
    }
    return canonicalize_uniform(MpsState::uniform({c.b[0], c.b[1]}));
}

Trajectory generate(const CircuitSpec &spec, GateLog *log) {
    auto streams = RealizationStreams::make(spec.seed, spec.realization);
    if(spec.uniform) return {run_uniform_ti(spec, streams, log), {}};
    switch(spec.family) {
        case Family::rmps: {
            spec.validate();
            CounterRng rng(derive_stream_key(spec.seed, spec.realization, StreamRole::tensors));
            return {build_rmps(spec.n_sites, spec.chi, spec.d, rng, false), {}};
        }
        case Family::brickwork:
        case Family::brickwork_ti: return {run_brickwork(spec, streams, log), {}};
        case Family::monitored: return run_monitored(spec, streams, log);
    }
    throw std::logic_error("generate: unhandled family");
}

MpsState canonicalize_uniform(const MpsState &cell_state, double tol, Index max_iter) {
    if(!cell_state.is_uniform()) throw std::invalid_argument("canonicalize_uniform: expected a uniform state");
    std::vector<SiteTensor> cell(cell_state.sites().begin(), cell_state.sites().end());
    const std::size_t       len = cell.size();

    // Left fixed point at every bond of the cell by power iteration.
    const Index   chi0 = cell.front().left_dim();
    ComplexMatrix l    = ComplexMatrix::Identity(chi0, chi0) / static_cast<double>(chi0);
    std::vector<ComplexMatrix> fixed(len);
    bool                       converged = false;
    for(Index it = 0; it < max_iter; ++it) {
        ComplexMatrix next = l;
        for(std::size_t j = 0; j < len; ++j) {
            next = apply_left_map(cell[j], next);
            const double tr = std::real(next.trace());
            if(!(tr > 0)) throw ConvergenceError("canonicalize_uniform: transfer map annihilated the fixed-point estimate");
            for(Index s = 0; s < cell[j].phys_dim(); ++s) cell[j][s] /= std::sqrt(tr);
            next /= tr;
            if(j + 1 < len) fixed[j + 1] = next;
        }
        next = 0.5 * (next + next.adjoint());
        const double delta = (next - l).norm();
        l                  = next;
        if(delta < tol) {
            converged = true;
            break;
        }
    }
    if(!converged) throw ConvergenceError(fmt::format("canonicalize_uniform: fixed point not converged after {} iterations", max_iter));
    fixed[0] = l;
    for(std::size_t j = 0; j + 1 < len; ++j) fixed[j + 1] = apply_left_map(cell[j], fixed[j]);

    // X_j = sqrt(D) V^dagger and its pseudo-inverse in the eigenbasis of l_j.
    std::vector<ComplexMatrix> x(len), x_pinv(len);
    for(std::size_t j = 0; j < len; ++j) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (fixed[j] + fixed[j].adjoint()));
        if(es.info() != Eigen::Success) throw ConvergenceError("canonicalize_uniform: eigensolver failed on the fixed point");
        // Descending order so that null directions come last.
        const RealVector    w = es.eigenvalues().reverse();
        const ComplexMatrix v = es.eigenvectors().rowwise().reverse();
        const double        wmax = w(0);
        RealVector          sq = RealVector::Zero(w.size()), isq = RealVector::Zero(w.size());
        for(Index i = 0; i < w.size(); ++i)
            if(w(i) > 1e-13 * wmax) {
                sq(i)  = std::sqrt(w(i));
                isq(i) = 1.0 / sq(i);
            }
        x[j]      = sq.cast<cplx>().asDiagonal() * v.adjoint();
        x_pinv[j] = v * isq.cast<cplx>().asDiagonal();
    }
    std::vector<SiteTensor> out;
    for(std::size_t j = 0; j < len; ++j) {
        SiteTensor t = cell[j];
        for(Index s = 0; s < t.phys_dim(); ++s) t[s] = x[j] * cell[j][s] * x_pinv[(j + 1) % len];
        out.push_back(std::move(t));
    }
    return MpsState::uniform(std::move(out));
}

} // namespace mpsens
