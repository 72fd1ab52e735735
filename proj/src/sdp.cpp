#include "heatctl/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heatctl/error.hpp"

namespace heatctl {

namespace {

Eigen::MatrixXd sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return a.cwiseProduct(b).sum(); }

// A(W)_i = sum_j <A_ij, W_j>
Eigen::VectorXd apply_a(const SdpProblem& p, const std::vector<Eigen::MatrixXd>& W) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p.variables());
    for (std::size_t j = 0; j < p.blocks.size(); ++j) {
        for (const auto& [i, Aij] : p.blocks[j].A) out(i) += inner(Aij, W[j]);
    }
    return out;
}

Eigen::MatrixXd apply_at(const SdpBlock& block, const Eigen::VectorXd& y) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(block.size(), block.size());
    for (const auto& [i, Aij] : block.A) out += y(i) * Aij;
    return out;
}

}  // namespace

std::vector<Eigen::MatrixXd> sdp_slack(const SdpProblem& problem, const Eigen::VectorXd& y) {
    std::vector<Eigen::MatrixXd> Z;
    Z.reserve(problem.blocks.size());
    for (const SdpBlock& block : problem.blocks) Z.push_back(block.C - apply_at(block, y));
    return Z;
}

double max_psd_step(const Eigen::MatrixXd& S, const Eigen::MatrixXd& dS) {
    const Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) return 0.0;
    Eigen::MatrixXd W = llt.matrixL().solve(dS);
    W = llt.matrixL().solve(W.transpose()).transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(W), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

SdpSolution sdp_solve(const SdpProblem& p, const Eigen::VectorXd& y0, const SdpOptions& opt) {
    const Eigen::Index m = p.variables();
    if (y0.size() != m) throw Error(ErrorKind::InvalidArgument, "starting point has the wrong dimension");
    const std::size_t nb = p.blocks.size();

    SdpSolution sol;
    sol.y = y0;
    sol.Z = sdp_slack(p, y0);
    sol.X.resize(nb);
    double total_dim = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
        const Eigen::Index n = p.blocks[j].size();
        sol.X[j] = Eigen::MatrixXd::Identity(n, n);
        total_dim += static_cast<double>(n);
        if (Eigen::LLT<Eigen::MatrixXd>(sol.Z[j]).info() != Eigen::Success) {
            throw Error(ErrorKind::InvalidArgument, "starting point is not strictly dual feasible");
        }
    }
    const double bnorm = p.b.norm();

    std::vector<Eigen::MatrixXd> Zinv(nb), dX(nb), dZ(nb), dXa(nb), dZa(nb), Rd(nb);
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        sol.iterations = iter;
        if (opt.stop_below && sol.y(opt.stop_below->first) < opt.stop_below->second) {
            sol.status = SdpStatus::StoppedEarly;
            break;
        }
        double xz = 0.0;
        sol.primal_objective = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            const Eigen::LLT<Eigen::MatrixXd> llt(sol.Z[j]);
            if (llt.info() != Eigen::Success) {
                sol.status = SdpStatus::NumericalFailure;
                sol.message = "dual slack lost definiteness";
                return sol;
            }
            Zinv[j] = llt.solve(Eigen::MatrixXd::Identity(sol.Z[j].rows(), sol.Z[j].cols()));
            xz += inner(sol.X[j], sol.Z[j]);
            sol.primal_objective += inner(p.blocks[j].C, sol.X[j]);
            Rd[j] = p.blocks[j].C - sol.Z[j] - apply_at(p.blocks[j], sol.y);
        }
        sol.dual_objective = p.b.dot(sol.y);
        const Eigen::VectorXd rp = p.b - apply_a(p, sol.X);
        sol.primal_residual = rp.norm() / (1.0 + bnorm);
        const double mu = xz / total_dim;
        const double rel_gap = std::abs(sol.primal_objective - sol.dual_objective) /
                               (1.0 + std::abs(sol.primal_objective) + std::abs(sol.dual_objective));
        if (rel_gap < opt.gap_tol && sol.primal_residual < opt.feasibility_tol) {
            sol.status = SdpStatus::Optimal;
            return sol;
        }

        // Schur complement M_ik = sum_j <A_kj, X_j A_ij Z_j^{-1}>
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t j = 0; j < nb; ++j) {
            const SdpBlock& blk = p.blocks[j];
            std::vector<Eigen::MatrixXd> G;
            G.reserve(blk.A.size());
            for (const auto& entry : blk.A) G.push_back(sol.X[j] * entry.second * Zinv[j]);
            for (std::size_t a = 0; a < blk.A.size(); ++a) {
                for (std::size_t c = a; c < blk.A.size(); ++c) {
                    const double v = blk.A[c].second.cwiseProduct(G[a].transpose()).sum();
                    M(blk.A[a].first, blk.A[c].first) += v;
                    if (a != c) M(blk.A[c].first, blk.A[a].first) += v;
                }
            }
        }
        M = sym(M);
        const double diag_scale = std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < m; ++i) {
            if (M(i, i) <= 1e-14 * diag_scale) M(i, i) += 1e-14 * diag_scale;
        }
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        if (ldlt.info() != Eigen::Success) {
            sol.status = SdpStatus::NumericalFailure;
            sol.message = "Schur complement factorization failed";
            return sol;
        }

        auto direction = [&](double sigma_mu, const std::vector<Eigen::MatrixXd>* Q, std::vector<Eigen::MatrixXd>& DX,
                             std::vector<Eigen::MatrixXd>& DZ) {
            std::vector<Eigen::MatrixXd> W(nb);
            for (std::size_t j = 0; j < nb; ++j) {
                W[j] = -sigma_mu * Zinv[j] + sol.X[j] * Rd[j] * Zinv[j];
                if (Q) W[j] += (*Q)[j] * Zinv[j];
                W[j] = sym(W[j]);
            }
            const Eigen::VectorXd rhs = p.b + apply_a(p, W);
            const Eigen::VectorXd dy = ldlt.solve(rhs);
            for (std::size_t j = 0; j < nb; ++j) {
                DZ[j] = Rd[j] - apply_at(p.blocks[j], dy);
                Eigen::MatrixXd num = sol.X[j] * DZ[j];
                if (Q) num += (*Q)[j];
                DX[j] = sym(sigma_mu * Zinv[j] - sol.X[j] - num * Zinv[j]);
            }
            return dy;
        };

        auto step_lengths = [&](const std::vector<Eigen::MatrixXd>& DX, const std::vector<Eigen::MatrixXd>& DZ) {
            double ap = std::numeric_limits<double>::infinity();
            double ad = ap;
            for (std::size_t j = 0; j < nb; ++j) {
                ap = std::min(ap, max_psd_step(sol.X[j], DX[j]));
                ad = std::min(ad, max_psd_step(sol.Z[j], DZ[j]));
            }
            return std::pair(ap, ad);
        };

        (void)direction(0.0, nullptr, dXa, dZa);
        const auto [apa, ada] = step_lengths(dXa, dZa);
        const double ap_aff = std::min(1.0, apa);
        const double ad_aff = std::min(1.0, ada);
        double xz_aff = 0.0;
        for (std::size_t j = 0; j < nb; ++j) xz_aff += inner(sol.X[j] + ap_aff * dXa[j], sol.Z[j] + ad_aff * dZa[j]);
        const double ratio = std::clamp(xz_aff / xz, 0.0, 1.0);
        const double sigma = std::max(ratio * ratio * ratio, 1e-6);

        std::vector<Eigen::MatrixXd> Q(nb);
        for (std::size_t j = 0; j < nb; ++j) Q[j] = dXa[j] * dZa[j];
        const Eigen::VectorXd dy = direction(sigma * mu, &Q, dX, dZ);
        const auto [apm, adm] = step_lengths(dX, dZ);
        const double ap = std::min(1.0, opt.step_fraction * apm);
        const double ad = std::min(1.0, opt.step_fraction * adm);
        if (!(ap > 1e-14) && !(ad > 1e-14)) {
            sol.status = SdpStatus::NumericalFailure;
            sol.message = "step length collapsed";
            return sol;
        }
        for (std::size_t j = 0; j < nb; ++j) {
            sol.X[j] += ap * dX[j];
            sol.Z[j] += ad * dZ[j];
        }
        sol.y += ad * dy;
        // re-derive Z from y to keep dual feasibility exact
        std::vector<Eigen::MatrixXd> Zy = sdp_slack(p, sol.y);
        bool ok = true;
        for (std::size_t j = 0; j < nb; ++j) {
            if (Eigen::LLT<Eigen::MatrixXd>(Zy[j]).info() != Eigen::Success) ok = false;
        }
        if (ok) sol.Z = std::move(Zy);
    }
    if (sol.status != SdpStatus::StoppedEarly) {
        sol.status = SdpStatus::MaxIterations;
        sol.message = "iteration limit reached";
    }
    sol.dual_objective = p.b.dot(sol.y);
    return sol;
}

}  // namespace heatctl
