#include "aromip/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <ostream>

namespace aromip {

namespace {

// ---------------------------------------------------------------------------
// Sparse LU of the basis matrix (Gilbert-Peierls left-looking, partial
// pivoting), plus product-form eta updates between refactorizations.
// ---------------------------------------------------------------------------

struct Csc {
    std::vector<std::size_t> ptr; // size ncols+1
    std::vector<int> idx;         // row indices
    std::vector<double> val;
    int nrows = 0;

    int col_nnz(int j) const { return static_cast<int>(ptr[j + 1] - ptr[j]); }
};

class BasisLU {
public:
    // Factorizes the columns basic_col[0..m-1] of W. Columns that turn out to
    // be (numerically) dependent are replaced by the logical column of an
    // unpivoted row; the replacement is reported through `kicked` as pairs
    // (basis_slot, replacement_col).
    void factorize(const Csc& W, int n_struct, std::vector<int>& basic_col,
                   std::vector<std::pair<int, int>>& kicked) {
        m_ = static_cast<int>(basic_col.size());
        kicked.clear();
        l_ptr_.assign(1, 0);
        l_idx_.clear();
        l_val_.clear();
        u_ptr_.assign(1, 0);
        u_idx_.clear();
        u_val_.clear();
        u_piv_.assign(m_, 0.0);
        pos_of_row_.assign(m_, -1);
        row_of_pos_.assign(m_, -1);
        slot_of_pos_.assign(m_, -1);
        pos_of_slot_.assign(m_, -1);
        etas_pivot_slot_.clear();
        etas_ptr_.assign(1, 0);
        etas_idx_.clear();
        etas_val_.clear();

        // process sparser columns first
        std::vector<int> order(m_);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return W.col_nnz(basic_col[a]) < W.col_nnz(basic_col[b]);
        });

        std::vector<double> work(m_, 0.0);
        std::vector<int> pattern;
        std::vector<int> failed_slots;
        int npiv = 0;

        // static row counts over the basic columns: preferring sparse pivot
        // rows (threshold pivoting) keeps the fill-in down
        std::vector<int> row_count(m_, 0);
        for (int c : basic_col)
            for (std::size_t k = W.ptr[c]; k < W.ptr[c + 1]; ++k) ++row_count[W.idx[k]];

        auto process = [&](int slot) -> bool {
            const int j = basic_col[slot];
            // scatter column j
            pattern.clear();
            for (std::size_t k = W.ptr[j]; k < W.ptr[j + 1]; ++k) {
                work[W.idx[k]] = W.val[k];
                pattern.push_back(W.idx[k]);
            }
            // symbolic reach over already-pivoted positions, then numeric in
            // ascending position order (edges always point forward)
            touched_pos_.clear();
            for (int r : pattern)
                if (pos_of_row_[r] >= 0) reach(pos_of_row_[r]);
            std::sort(touched_pos_.begin(), touched_pos_.end());
            for (int p : touched_pos_) {
                visited_[p] = false;
                const int rp = row_of_pos_[p];
                const double x = work[rp];
                if (x == 0.0) continue;
                for (std::size_t k = l_ptr_[p]; k < l_ptr_[p + 1]; ++k) {
                    const int rr = l_idx_[k];
                    if (work[rr] == 0.0) pattern.push_back(rr);
                    work[rr] -= l_val_[k] * x;
                }
            }
            // pivot: among unpivoted rows within a factor 10 of the largest
            // magnitude, prefer the sparsest row; ties by magnitude
            int piv_row = -1;
            double piv_abs = 0.0, col_max = 0.0, cand_max = 0.0;
            for (int r : pattern) {
                const double a = std::abs(work[r]);
                col_max = std::max(col_max, a);
                if (pos_of_row_[r] < 0) cand_max = std::max(cand_max, a);
            }
            for (int r : pattern) {
                if (pos_of_row_[r] >= 0) continue;
                const double a = std::abs(work[r]);
                if (a < 0.1 * cand_max || a == 0.0) continue;
                if (piv_row < 0 || row_count[r] < row_count[piv_row] ||
                    (row_count[r] == row_count[piv_row] && a > piv_abs)) {
                    piv_row = r;
                    piv_abs = a;
                }
            }
            if (piv_row < 0 || piv_abs < 1e-11 * std::max(1.0, col_max) || piv_abs < 1e-100) {
                for (int r : pattern) work[r] = 0.0;
                for (int p : touched_pos_)
                    if (work[row_of_pos_[p]] != 0.0) work[row_of_pos_[p]] = 0.0;
                return false;
            }
            const int k = npiv++;
            const double piv = work[piv_row];
            // U column k: entries at pivoted positions
            for (int p : touched_pos_) {
                const double x = work[row_of_pos_[p]];
                if (x != 0.0) {
                    u_idx_.push_back(p);
                    u_val_.push_back(x);
                }
            }
            u_ptr_.push_back(u_idx_.size());
            u_piv_[k] = piv;
            // L column k: remaining unpivoted rows, scaled. Zero each value as
            // it is emitted so duplicate rows in `pattern` (possible after an
            // exact cancellation refill) are not written twice.
            for (int r : pattern) {
                if (pos_of_row_[r] < 0 && r != piv_row && work[r] != 0.0) {
                    l_idx_.push_back(r);
                    l_val_.push_back(work[r] / piv);
                    work[r] = 0.0;
                }
            }
            l_ptr_.push_back(l_idx_.size());
            pos_of_row_[piv_row] = k;
            row_of_pos_[k] = piv_row;
            slot_of_pos_[k] = slot;
            pos_of_slot_[slot] = k;
            for (int r : pattern) work[r] = 0.0;
            for (int p : touched_pos_) work[row_of_pos_[p]] = 0.0;
            return true;
        };

        visited_.assign(m_, false);
        for (int slot : order)
            if (!process(slot)) failed_slots.push_back(slot);

        if (!failed_slots.empty()) {
            std::sort(failed_slots.begin(), failed_slots.end());
            std::vector<int> free_rows;
            for (int r = 0; r < m_; ++r)
                if (pos_of_row_[r] < 0) free_rows.push_back(r);
            if (free_rows.size() != failed_slots.size())
                throw NumericalFailure("basis factorization lost pivots");
            for (std::size_t i = 0; i < failed_slots.size(); ++i) {
                const int slot = failed_slots[i];
                const int logical = n_struct + free_rows[i];
                kicked.emplace_back(slot, logical);
                basic_col[slot] = logical;
                if (!process(slot)) throw NumericalFailure("basis repair failed");
            }
        }
        // convert L row indices to positions for the solves
        l_pos_.resize(l_idx_.size());
        for (std::size_t k = 0; k < l_idx_.size(); ++k) l_pos_[k] = pos_of_row_[l_idx_[k]];
    }

    int num_etas() const { return static_cast<int>(etas_pivot_slot_.size()); }
    std::size_t factor_nnz() const { return l_idx_.size() + u_idx_.size() + u_piv_.size(); }
    std::size_t eta_nnz() const { return etas_idx_.size(); }

    // records an eta from the ftran'd entering column (slot space)
    void push_eta(const std::vector<double>& w, int pivot_slot, double drop_tol) {
        etas_pivot_slot_.push_back(pivot_slot);
        for (int i = 0; i < m_; ++i) {
            if (i == pivot_slot || std::abs(w[i]) > drop_tol) {
                etas_idx_.push_back(i);
                etas_val_.push_back(w[i]);
            }
        }
        etas_ptr_.push_back(etas_idx_.size());
    }

    // solve B x = rhs; rhs indexed by row, result indexed by basis slot
    void ftran(std::vector<double>& x, std::vector<double>& scratch) const {
        std::vector<double>& z = scratch;
        z.assign(m_, 0.0);
        for (int r = 0; r < m_; ++r) z[pos_of_row_[r]] = x[r];
        for (int p = 0; p < m_; ++p) {
            const double xp = z[p];
            if (xp == 0.0) continue;
            for (std::size_t k = l_ptr_[p]; k < l_ptr_[p + 1]; ++k) z[l_pos_[k]] -= l_val_[k] * xp;
        }
        for (int k = m_ - 1; k >= 0; --k) {
            double xk = z[k];
            if (xk == 0.0) continue;
            xk /= u_piv_[k];
            z[k] = xk;
            for (std::size_t t = u_ptr_[k]; t < u_ptr_[k + 1]; ++t) z[u_idx_[t]] -= u_val_[t] * xk;
        }
        for (int k = 0; k < m_; ++k) x[slot_of_pos_[k]] = z[k];
        // apply eta updates in order
        for (std::size_t e = 0; e < etas_pivot_slot_.size(); ++e) {
            const int s = etas_pivot_slot_[e];
            double piv = 1.0, xs = x[s];
            for (std::size_t k = etas_ptr_[e]; k < etas_ptr_[e + 1]; ++k)
                if (etas_idx_[k] == s) piv = etas_val_[k];
            xs /= piv;
            for (std::size_t k = etas_ptr_[e]; k < etas_ptr_[e + 1]; ++k) {
                const int i = etas_idx_[k];
                if (i != s) x[i] -= etas_val_[k] * xs;
            }
            x[s] = xs;
        }
    }

    // solve B^T y = c; c indexed by basis slot, result indexed by row
    void btran(std::vector<double>& y, std::vector<double>& scratch) const {
        for (std::size_t e = etas_pivot_slot_.size(); e-- > 0;) {
            const int s = etas_pivot_slot_[e];
            double piv = 1.0, acc = y[s];
            for (std::size_t k = etas_ptr_[e]; k < etas_ptr_[e + 1]; ++k) {
                const int i = etas_idx_[k];
                if (i == s)
                    piv = etas_val_[k];
                else
                    acc -= etas_val_[k] * y[i];
            }
            y[s] = acc / piv;
        }
        std::vector<double>& w = scratch;
        w.assign(m_, 0.0);
        for (int k = 0; k < m_; ++k) {
            double v = y[slot_of_pos_[k]];
            for (std::size_t t = u_ptr_[k]; t < u_ptr_[k + 1]; ++t) v -= u_val_[t] * w[u_idx_[t]];
            w[k] = v / u_piv_[k];
        }
        for (int p = m_ - 1; p >= 0; --p) {
            double v = w[p];
            for (std::size_t k = l_ptr_[p]; k < l_ptr_[p + 1]; ++k) v -= l_val_[k] * w[l_pos_[k]];
            w[p] = v;
        }
        for (int p = 0; p < m_; ++p) y[row_of_pos_[p]] = w[p];
    }

private:
    void reach(int p) {
        if (visited_[p]) return;
        // iterative DFS
        dfs_stack_.clear();
        dfs_stack_.push_back(p);
        while (!dfs_stack_.empty()) {
            const int q = dfs_stack_.back();
            dfs_stack_.pop_back();
            if (visited_[q]) continue;
            visited_[q] = true;
            touched_pos_.push_back(q);
            for (std::size_t k = l_ptr_[q]; k < l_ptr_[q + 1]; ++k) {
                const int pr = pos_of_row_[l_idx_[k]];
                if (pr >= 0 && !visited_[pr]) dfs_stack_.push_back(pr);
            }
        }
    }

    int m_ = 0;
    std::vector<std::size_t> l_ptr_, u_ptr_;
    std::vector<int> l_idx_, u_idx_;
    std::vector<std::size_t> l_pos_;
    std::vector<double> l_val_, u_val_, u_piv_;
    std::vector<int> pos_of_row_, row_of_pos_, slot_of_pos_, pos_of_slot_;
    std::vector<bool> visited_;
    std::vector<int> touched_pos_, dfs_stack_;
    // eta file
    std::vector<int> etas_pivot_slot_;
    std::vector<std::size_t> etas_ptr_;
    std::vector<int> etas_idx_;
    std::vector<double> etas_val_;
};

// ---------------------------------------------------------------------------
// Bounded-variable primal simplex with a composite (infeasibility-sum)
// phase 1, Harris-style two-pass ratio test and Bland fallback.
// ---------------------------------------------------------------------------

class SimplexCore {
public:
    SimplexCore(const LpModel& model, const SimplexParams& params)
        : p_(params), n_(model.num_cols()), m_(model.num_rows()), nt_(n_ + m_) {
        model.check_consistent();
        maximize_ = model.sense == ObjSense::Maximize;
        obj_constant_ = model.obj_constant;
        cost_.assign(nt_, 0.0);
        lo_.resize(nt_);
        up_.resize(nt_);
        for (int j = 0; j < n_; ++j) {
            cost_[j] = maximize_ ? -model.obj[j] : model.obj[j];
            lo_[j] = model.col_lower[j];
            up_[j] = model.col_upper[j];
        }
        b_ = model.rhs;
        for (int i = 0; i < m_; ++i) {
            const int j = n_ + i;
            switch (model.row_sense[i]) {
                case RowSense::LessEqual:
                    lo_[j] = 0.0;
                    up_[j] = kInf;
                    break;
                case RowSense::GreaterEqual:
                    lo_[j] = -kInf;
                    up_[j] = 0.0;
                    break;
                case RowSense::Equal:
                    lo_[j] = 0.0;
                    up_[j] = 0.0;
                    break;
            }
        }
        build_csc(model);
        if (p_.max_iterations > 0)
            max_iters_ = p_.max_iterations;
        else
            max_iters_ = 20000 + 100L * (m_ + n_);
    }

    LpSolution run(const std::vector<signed char>* warm) {
        init_basis(warm);
        refactorize();
        compute_basic_values();

        SolveStatus status = SolveStatus::Optimal;
        bool in_phase1 = infeasibility() > phase1_done_tol();
        long degen_streak = 0;
        bool bland = false;
        devex_w_.assign(nt_, 1.0);
        bool last_phase1 = in_phase1;

        while (true) {
            if (iters_ >= max_iters_) throw NumericalFailure("simplex iteration limit reached");
            if (in_phase1 != last_phase1) {
                devex_w_.assign(nt_, 1.0);  // new reference framework per phase
                last_phase1 = in_phase1;
            }
            // devex pricing: maximize d^2 / w
            btran_costs(in_phase1);
            int enter = -1, dir = 0;
            double best = 0.0;
            for (int j = 0; j < nt_; ++j) {
                if (pos_of_col_[j] >= 0) continue;
                if (up_[j] - lo_[j] <= 0.0) continue; // fixed
                const double d = (in_phase1 ? 0.0 : cost_[j]) - col_dot(j, y_);
                const signed char st = stat_[j];
                double viol = 0.0;
                int dd = 0;
                if ((st == kAtLower || st == kNonbasicFree) && d < -p_.opt_tol) {
                    viol = -d;
                    dd = 1;
                }
                if (viol == 0.0 && (st == kAtUpper || st == kNonbasicFree) && d > p_.opt_tol) {
                    viol = d;
                    dd = -1;
                }
                if (dd == 0) continue;
                if (bland) {
                    enter = j;
                    dir = dd;
                    break;
                }
                const double score = viol * viol / devex_w_[j];
                if (score > best) {
                    best = score;
                    enter = j;
                    dir = dd;
                }
            }
            if (enter < 0) {
                if (in_phase1) {
                    if (infeasibility() <= phase1_done_tol()) {
                        in_phase1 = false;
                        continue;
                    }
                    status = SolveStatus::Infeasible;
                    break;
                }
                if (infeasibility() > 10.0 * phase1_done_tol()) {
                    // drifted back out of feasibility; clean up and retry
                    refactorize();
                    compute_basic_values();
                    if (infeasibility() > phase1_done_tol()) {
                        in_phase1 = true;
                        continue;
                    }
                }
                status = SolveStatus::Optimal;
                break;
            }

            // direction
            ftran_column(enter, w_);
            const RatioResult rr = ratio_test(enter, dir, in_phase1);
            if (rr.kind == RatioResult::Unbounded) {
                if (in_phase1) throw NumericalFailure("phase-1 ray detected");
                status = SolveStatus::Unbounded;
                break;
            }
            ++iters_;
            if (rr.step < 1e-10) {
                if (++degen_streak >= p_.degenerate_limit) bland = true;
            } else {
                degen_streak = 0;
                bland = false;
            }
            if (rr.kind == RatioResult::Pivot) update_devex(enter, rr);
            if (devex_reset_) {
                devex_w_.assign(nt_, 1.0);
                devex_reset_ = false;
            }
            apply_step(enter, dir, rr);
            if (p_.iteration_log && iters_ % 1000 == 0)
                (*p_.iteration_log) << "iter " << iters_ << " inf " << infeasibility() << '\n';
            if (lu_.num_etas() >= p_.refactor_interval ||
                lu_.eta_nnz() > 2 * lu_.factor_nnz() + 500) {
                refactorize();
                compute_basic_values();
            }
        }

        return extract(status);
    }

private:
    struct RatioResult {
        enum Kind { Pivot, BoundFlip, Unbounded } kind = Pivot;
        int leave_slot = -1;
        signed char leave_stat = kAtLower;
        double step = 0.0;
    };

    void build_csc(const LpModel& model) {
        W_.nrows = m_;
        const SparseMatrix t = model.mat.transposed();
        W_.ptr.assign(nt_ + 1, 0);
        std::size_t total = t.nnz() + static_cast<std::size_t>(m_);
        W_.idx.reserve(total);
        W_.val.reserve(total);
        for (int j = 0; j < n_; ++j) {
            t.for_row(j, [&](int r, double v) {
                W_.idx.push_back(r);
                W_.val.push_back(v);
            });
            W_.ptr[j + 1] = W_.idx.size();
        }
        for (int i = 0; i < m_; ++i) {
            W_.idx.push_back(i);
            W_.val.push_back(1.0);
            W_.ptr[n_ + i + 1] = W_.idx.size();
        }
    }

    double phase1_done_tol() const { return p_.feas_tol * std::max(1, m_); }

    void init_basis(const std::vector<signed char>* warm) {
        stat_.assign(nt_, kAtLower);
        basic_col_.clear();
        pos_of_col_.assign(nt_, -1);
        bool use_warm = warm && static_cast<int>(warm->size()) == nt_;
        if (use_warm) {
            int nb = 0;
            for (int j = 0; j < nt_; ++j)
                if ((*warm)[j] == kBasic) ++nb;
            if (nb == 0) use_warm = false;
        }
        if (use_warm) {
            for (int j = 0; j < nt_; ++j) {
                signed char s = (*warm)[j];
                if (s == kBasic && static_cast<int>(basic_col_.size()) < m_) {
                    pos_of_col_[j] = static_cast<int>(basic_col_.size());
                    basic_col_.push_back(j);
                    stat_[j] = kBasic;
                } else {
                    stat_[j] = nonbasic_default(j, s == kBasic ? kAtLower : s);
                }
            }
            // top up with logicals of uncovered rows
            for (int i = 0; i < m_ && static_cast<int>(basic_col_.size()) < m_; ++i) {
                const int j = n_ + i;
                if (pos_of_col_[j] < 0) {
                    pos_of_col_[j] = static_cast<int>(basic_col_.size());
                    basic_col_.push_back(j);
                    stat_[j] = kBasic;
                }
            }
            if (static_cast<int>(basic_col_.size()) < m_) use_warm = false;
        }
        if (!use_warm) {
            basic_col_.clear();
            pos_of_col_.assign(nt_, -1);
            for (int j = 0; j < n_; ++j) stat_[j] = nonbasic_default(j, kAtLower);
            for (int i = 0; i < m_; ++i) {
                const int j = n_ + i;
                stat_[j] = kBasic;
                pos_of_col_[j] = i;
                basic_col_.push_back(j);
            }
        }
    }

    signed char nonbasic_default(int j, signed char wanted) const {
        const bool lf = std::isfinite(lo_[j]), uf = std::isfinite(up_[j]);
        if (wanted == kAtLower && lf) return kAtLower;
        if (wanted == kAtUpper && uf) return kAtUpper;
        if (lf) return kAtLower;
        if (uf) return kAtUpper;
        return kNonbasicFree;
    }

    void refactorize() {
        std::vector<std::pair<int, int>> kicked;
        lu_.factorize(W_, n_, basic_col_, kicked);
        for (const auto& [slot, logical] : kicked) {
            // a dependent column was replaced with a logical; demote it
            for (int j = 0; j < nt_; ++j) {
                if (pos_of_col_[j] == slot && j != logical) {
                    pos_of_col_[j] = -1;
                    stat_[j] = nonbasic_default(j, kAtLower);
                }
            }
            pos_of_col_[logical] = slot;
            stat_[logical] = kBasic;
        }
    }

    void compute_basic_values() {
        xval_.assign(nt_, 0.0);
        for (int j = 0; j < nt_; ++j) {
            if (stat_[j] == kAtLower)
                xval_[j] = lo_[j];
            else if (stat_[j] == kAtUpper)
                xval_[j] = up_[j];
            else if (stat_[j] == kNonbasicFree)
                xval_[j] = 0.0;
        }
        std::vector<double> r = b_;
        for (int j = 0; j < nt_; ++j) {
            if (pos_of_col_[j] >= 0) continue;
            const double x = xval_[j];
            if (x == 0.0) continue;
            for (std::size_t k = W_.ptr[j]; k < W_.ptr[j + 1]; ++k) r[W_.idx[k]] -= W_.val[k] * x;
        }
        lu_.ftran(r, scratch_);
        for (int i = 0; i < m_; ++i) xval_[basic_col_[i]] = r[i];
    }

    double infeasibility() const {
        double s = 0.0;
        for (int i = 0; i < m_; ++i) {
            const int j = basic_col_[i];
            if (xval_[j] < lo_[j]) s += lo_[j] - xval_[j];
            if (xval_[j] > up_[j]) s += xval_[j] - up_[j];
        }
        return s;
    }

    void btran_costs(bool phase1) {
        y_.assign(m_, 0.0);
        std::vector<double> cb(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            const int j = basic_col_[i];
            if (phase1) {
                if (xval_[j] < lo_[j] - p_.feas_tol)
                    cb[i] = -1.0;
                else if (xval_[j] > up_[j] + p_.feas_tol)
                    cb[i] = 1.0;
            } else {
                cb[i] = cost_[j];
            }
        }
        y_ = cb;
        lu_.btran(y_, scratch_);
    }

    double col_dot(int j, const std::vector<double>& y) const {
        double s = 0.0;
        for (std::size_t k = W_.ptr[j]; k < W_.ptr[j + 1]; ++k) s += W_.val[k] * y[W_.idx[k]];
        return s;
    }

    void ftran_column(int j, std::vector<double>& w) {
        w.assign(m_, 0.0);
        for (std::size_t k = W_.ptr[j]; k < W_.ptr[j + 1]; ++k) w[W_.idx[k]] = W_.val[k];
        lu_.ftran(w, scratch_);
    }

    // Basic variable i moves as x_i - t * dir * w_i when the entering column
    // increases by t * dir.
    RatioResult ratio_test(int enter, int dir, bool phase1) {
        RatioResult res;
        const double own_range = up_[enter] - lo_[enter];
        double theta = std::isfinite(own_range) ? own_range : kInf;
        bool own_limits = std::isfinite(own_range);

        struct Cand {
            int slot;
            double t_exact;
            double t_slack; // with feasibility tolerance
            double wabs;
            signed char bound; // status the leaving variable takes
        };
        std::vector<Cand> cands;
        cands.reserve(16);
        for (int i = 0; i < m_; ++i) {
            const double a = dir * w_[i];
            if (std::abs(a) <= p_.pivot_tol) continue;
            const int j = basic_col_[i];
            const double x = xval_[j];
            const bool below = phase1 && x < lo_[j] - p_.feas_tol;
            const bool above = phase1 && x > up_[j] + p_.feas_tol;
            double bound = 0.0;
            signed char bstat = kAtLower;
            if (a > 0.0) {
                // x decreases
                if (above) {
                    bound = up_[j]; // reaches its violated bound
                    bstat = kAtUpper;
                } else if (below) {
                    continue; // moving further infeasible: accounted in the gradient
                } else if (std::isfinite(lo_[j])) {
                    bound = lo_[j];
                    bstat = kAtLower;
                } else {
                    continue;
                }
                cands.push_back({i, (x - bound) / a, (x - bound + p_.feas_tol) / a, std::abs(w_[i]), bstat});
            } else {
                // x increases
                if (below) {
                    bound = lo_[j];
                    bstat = kAtLower;
                } else if (above) {
                    continue;
                } else if (std::isfinite(up_[j])) {
                    bound = up_[j];
                    bstat = kAtUpper;
                } else {
                    continue;
                }
                cands.push_back({i, (bound - x) / (-a), (bound - x + p_.feas_tol) / (-a), std::abs(w_[i]), bstat});
            }
        }
        if (cands.empty()) {
            if (!own_limits) {
                res.kind = RatioResult::Unbounded;
                return res;
            }
            res.kind = RatioResult::BoundFlip;
            res.step = own_range;
            return res;
        }
        // Harris pass 1: relaxed minimum
        for (const Cand& c : cands) theta = std::min(theta, std::max(c.t_slack, 0.0));
        // pass 2: largest pivot among candidates within the relaxed step
        int best = -1;
        for (std::size_t k = 0; k < cands.size(); ++k) {
            if (std::max(cands[k].t_exact, 0.0) <= theta) {
                if (best < 0 || cands[k].wabs > cands[best].wabs) best = static_cast<int>(k);
            }
        }
        if (best < 0) {
            // every exact ratio exceeded the relaxed bound: take the smallest
            for (std::size_t k = 0; k < cands.size(); ++k)
                if (best < 0 || cands[k].t_exact < cands[best].t_exact) best = static_cast<int>(k);
        }
        const double t_pivot = std::max(cands[best].t_exact, 0.0);
        if (own_limits && own_range < t_pivot) {
            res.kind = RatioResult::BoundFlip;
            res.step = own_range;
            return res;
        }
        res.kind = RatioResult::Pivot;
        res.leave_slot = cands[best].slot;
        res.leave_stat = cands[best].bound;
        res.step = t_pivot;
        return res;
    }

    // devex weight update from the pivot row (Forrest-Goldfarb reference
    // framework; weights reset when they grow too large)
    void update_devex(int enter, const RatioResult& rr) {
        const int slot = rr.leave_slot;
        const double ar = w_[slot];
        if (std::abs(ar) < 1e-12) {
            devex_reset_ = true;
            return;
        }
        const double gamma = std::max(devex_w_[enter], 1.0);
        const double inv2 = gamma / (ar * ar);
        sigma_.assign(m_, 0.0);
        sigma_[slot] = 1.0;
        lu_.btran(sigma_, scratch_);
        double wmax = inv2;
        for (int j = 0; j < nt_; ++j) {
            if (pos_of_col_[j] >= 0 || j == enter) continue;
            const double aj = col_dot(j, sigma_);
            if (aj == 0.0) continue;
            const double cand = aj * aj * inv2;
            if (cand > devex_w_[j]) devex_w_[j] = cand;
            wmax = std::max(wmax, devex_w_[j]);
        }
        devex_w_[basic_col_[slot]] = std::max(inv2, 1.0);
        if (wmax > 1e10) devex_reset_ = true;
    }

    void apply_step(int enter, int dir, const RatioResult& rr) {
        const double t = rr.step;
        for (int i = 0; i < m_; ++i) xval_[basic_col_[i]] -= dir * t * w_[i];
        if (rr.kind == RatioResult::BoundFlip) {
            stat_[enter] = (dir > 0) ? kAtUpper : kAtLower;
            xval_[enter] = (dir > 0) ? up_[enter] : lo_[enter];
            return;
        }
        const int slot = rr.leave_slot;
        const int leave = basic_col_[slot];
        xval_[enter] = xval_[enter] + dir * t;
        xval_[leave] = (rr.leave_stat == kAtLower) ? lo_[leave] : up_[leave];
        stat_[leave] = rr.leave_stat;
        pos_of_col_[leave] = -1;
        stat_[enter] = kBasic;
        pos_of_col_[enter] = slot;
        basic_col_[slot] = enter;
        lu_.push_eta(w_, slot, 1e-13);
    }

    LpSolution extract(SolveStatus status) {
        LpSolution sol;
        sol.status = status;
        sol.iterations = iters_;
        sol.basis.assign(stat_.begin(), stat_.end());
        if (status == SolveStatus::Infeasible) {
            sol.objective = maximize_ ? -kInf : kInf;
            return sol;
        }
        if (status == SolveStatus::Unbounded) {
            sol.objective = maximize_ ? kInf : -kInf;
            return sol;
        }
        double obj = obj_constant_;
        for (int j = 0; j < nt_; ++j) obj += cost_[j] * xval_[j];
        sol.objective = maximize_ ? -obj + 2 * obj_constant_ : obj;
        // duals and reduced costs from the real objective
        btran_costs(false);
        sol.primal.assign(xval_.begin(), xval_.begin() + n_);
        sol.dual_rows.resize(m_);
        sol.reduced_costs.resize(n_);
        const double sgn = maximize_ ? -1.0 : 1.0;
        for (int i = 0; i < m_; ++i) sol.dual_rows[i] = sgn * y_[i];
        for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = sgn * (cost_[j] - col_dot(j, y_));
        return sol;
    }

    SimplexParams p_;
    int n_, m_, nt_;
    bool maximize_ = false;
    double obj_constant_ = 0.0;
    long iters_ = 0;
    long max_iters_ = 0;
    Csc W_;
    std::vector<double> cost_, lo_, up_, b_, xval_, y_, w_, scratch_, devex_w_, sigma_;
    bool devex_reset_ = false;
    std::vector<signed char> stat_;
    std::vector<int> basic_col_, pos_of_col_;
    BasisLU lu_;
};

}  // namespace

LpSolution solve_lp_core(const LpModel& model, const SimplexParams& params,
                         const std::vector<signed char>* warm_basis) {
    if (model.num_rows() == 0) {
        // pure bound problem
        LpSolution sol;
        const double sgn = model.sense == ObjSense::Maximize ? -1.0 : 1.0;
        sol.primal.resize(model.num_cols());
        double obj = model.obj_constant;
        for (int j = 0; j < model.num_cols(); ++j) {
            const double c = sgn * model.obj[j];
            double v;
            if (c > 0.0)
                v = model.col_lower[j];
            else if (c < 0.0)
                v = model.col_upper[j];
            else
                v = std::isfinite(model.col_lower[j]) ? model.col_lower[j]
                                                      : (std::isfinite(model.col_upper[j]) ? model.col_upper[j] : 0.0);
            if (!std::isfinite(v)) {
                sol.status = SolveStatus::Unbounded;
                sol.objective = model.sense == ObjSense::Maximize ? kInf : -kInf;
                return sol;
            }
            sol.primal[j] = v;
            obj += model.obj[j] * v;
        }
        sol.status = SolveStatus::Optimal;
        sol.objective = obj;
        sol.reduced_costs = model.obj;
        sol.basis.assign(model.obj.size(), kAtLower);
        return sol;
    }
    SimplexCore core(model, params);
    return core.run(warm_basis);
}

LpSolution solve_lp(const LpModel& model, const SimplexParams& params) {
    if (!params.presolve) return solve_lp_core(model, params, nullptr);
    PresolvedLp pre = PresolvedLp::build(model);
    if (pre.infeasible()) {
        LpSolution sol;
        sol.status = SolveStatus::Infeasible;
        sol.objective = model.sense == ObjSense::Maximize ? -kInf : kInf;
        return sol;
    }
    LpSolution red = solve_lp_core(pre.reduced(), params, nullptr);
    return pre.postsolve(red, model);
}

}  // namespace aromip
