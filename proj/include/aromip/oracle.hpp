#pragma once

#include <vector>

#include "aromip/instance.hpp"
#include "aromip/lp_model.hpp"
#include "aromip/reformulate.hpp"

namespace aromip {

// Brute-force ground truth for small instances.

struct OracleCaps {
    int max_dim = 6;        // uncertainty dimension for vertex enumeration
    int max_bin = 10;       // binary coordinates enumerated exhaustively
    long max_subsets = 2000000;  // active-set combinations tried
};

// Exact vertex set of the standardized uncertainty polytope, via enumeration
// of active-constraint subsets; deduplicated within 1e-9.
// Throws TooLarge when the combinatorics exceed the caps.
std::vector<std::vector<double>> enumerate_vertices(const OmegaStandard& om,
                                                    const OracleCaps& caps = {});

struct AdversarialResult {
    double value = 0.0;
    std::vector<double> worst_h;
    std::vector<int> worst_yfix;
};

// Exact adversarial recourse value at fixed x:
//   min over binary assignments y' of max over vertices h of the recourse LP,
// with infeasible fixings scored +inf. Throws TooLarge beyond the caps.
AdversarialResult adversarial_value(const WcaroInstance& inst, const std::vector<double>& x,
                                    const OracleCaps& caps = {});

struct CertReport {
    double mip_value = 0.0;
    double oracle_value_at_xstar = 0.0;  // G(x*) + exact adversarial value
    double margin = 0.0;                 // mip_value - oracle_value_at_xstar
    bool exact = false;
    std::vector<double> worst_h;
    std::vector<int> worst_yfix;
};

// Compares a single-level solve against the brute-force value at the returned
// first-stage point. The reformulation guarantees margin >= -tol; exact when
// |margin| <= tol.
CertReport certify(const WcaroInstance& inst, const SingleLevelModel& model,
                   const MipSolution& sol, double tol = 1e-6, const OracleCaps& caps = {});

// Canonical toy instances used throughout the test suite.
// T1: one first-stage variable x in [0,2] with cost x; one scenario h in [0,1];
//     one continuous recourse variable with y >= 0 and y >= -x + h, cost 1.
//     Exact value 1.
WcaroInstance make_t1();
// T2: no first stage; h in [0,1]; recourse (y1, mu) with mu binary,
//     y1 >= 0 and y1 + mu >= h, costs (1, 0.6). Exact value 0.6.
WcaroInstance make_t2();

}  // namespace aromip
