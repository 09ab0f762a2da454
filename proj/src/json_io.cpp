#include "aromip/json_io.hpp"

#include <fstream>

namespace aromip {

namespace {

using nlohmann::json;

json enc(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    return v;
}

double dec(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        throw ParseError("expected number or \"inf\"/\"-inf\", got '" + s + "'");
    }
    return j.get<double>();
}

json enc_vec(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(enc(x));
    return out;
}

std::vector<double> dec_vec(const json& j) {
    std::vector<double> out;
    out.reserve(j.size());
    for (const json& e : j) out.push_back(dec(e));
    return out;
}

json enc_mat(const SparseMatrix& m) {
    json trips = json::array();
    m.for_each([&](int r, int c, double v) { trips.push_back(json::array({r, c, v})); });
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", trips}};
}

SparseMatrix dec_mat(const json& j) {
    SparseMatrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
    for (const json& t : j.at("entries")) {
        if (!t.is_array() || t.size() != 3) throw ParseError("matrix entry must be [row, col, value]");
        const int r = t[0].get<int>(), c = t[1].get<int>();
        if (r < 0 || r >= m.rows() || c < 0 || c >= m.cols())
            throw ParseError("matrix entry out of range");
        m.add(r, c, dec(t[2]));
    }
    return m;
}

json enc_polytope(const Polytope& p) {
    std::string senses;
    for (RowSense s : p.senses) senses.push_back(static_cast<char>(s));
    return json{{"dim", p.dim},      {"a", enc_mat(p.a_mat)},    {"senses", senses},
                {"rhs", enc_vec(p.rhs)}, {"lower", enc_vec(p.lower)}, {"upper", enc_vec(p.upper)}};
}

Polytope dec_polytope(const json& j) {
    Polytope p;
    p.set_dim(j.at("dim").get<int>());
    p.lower = dec_vec(j.at("lower"));
    p.upper = dec_vec(j.at("upper"));
    p.a_mat = dec_mat(j.at("a"));
    p.rhs = dec_vec(j.at("rhs"));
    for (char c : j.at("senses").get<std::string>()) {
        if (c != 'L' && c != 'E' && c != 'G') throw ParseError("row sense must be one of L, E, G");
        p.senses.push_back(static_cast<RowSense>(c));
    }
    if (p.senses.size() != p.rhs.size()) throw ParseError("senses/rhs length mismatch");
    return p;
}

}  // namespace

json instance_to_json(const WcaroInstance& inst) {
    const FirstLevel& fl = inst.first;
    const OmegaStandard& om = inst.omega;
    const ThirdLevel& t3 = inst.third;
    json row_slack = json::array();
    for (char c : om.row_has_slack) row_slack.push_back(c != 0);
    return json{
        {"name", inst.name},
        {"first_level",
         {{"n_x", fl.n_x},
          {"feasible_set", enc_polytope(fl.feasible_set)},
          {"obj_linear", enc_vec(fl.obj_linear)},
          {"obj_quadratic_diag", enc_vec(fl.obj_quadratic_diag)},
          {"obj_constant", fl.obj_constant}}},
        {"omega",
         {{"a_omega", enc_mat(om.a_omega)},
          {"b_omega", enc_vec(om.b_omega)},
          {"row_has_slack", row_slack},
          {"h_lower", enc_vec(om.h_lower)},
          {"h_upper", enc_vec(om.h_upper)}}},
        {"third_level",
         {{"n_cont", t3.n_cont},
          {"n_bin", t3.n_bin},
          {"c", enc_vec(t3.c)},
          {"a_free", enc_mat(t3.a_free)},
          {"b_free", enc_vec(t3.b_free)},
          {"b_coupled", enc_mat(t3.b_coupled)},
          {"b_x", enc_mat(t3.b_x)},
          {"b_h", enc_mat(t3.b_h)},
          {"b0", enc_vec(t3.b0)},
          {"beta_lower", enc_vec(t3.beta_lower)},
          {"beta_upper", enc_vec(t3.beta_upper)}}}};
}

WcaroInstance instance_from_json(const json& j) {
    WcaroInstance inst;
    try {
        inst.name = j.value("name", "");
        const json& fj = j.at("first_level");
        inst.first.n_x = fj.at("n_x").get<int>();
        inst.first.feasible_set = dec_polytope(fj.at("feasible_set"));
        inst.first.obj_linear = dec_vec(fj.at("obj_linear"));
        inst.first.obj_quadratic_diag = dec_vec(fj.at("obj_quadratic_diag"));
        inst.first.obj_constant = fj.value("obj_constant", 0.0);
        const json& oj = j.at("omega");
        inst.omega.a_omega = dec_mat(oj.at("a_omega"));
        inst.omega.b_omega = dec_vec(oj.at("b_omega"));
        for (const json& e : oj.at("row_has_slack"))
            inst.omega.row_has_slack.push_back(e.get<bool>() ? 1 : 0);
        inst.omega.h_lower = dec_vec(oj.at("h_lower"));
        inst.omega.h_upper = dec_vec(oj.at("h_upper"));
        const json& tj = j.at("third_level");
        inst.third.n_cont = tj.at("n_cont").get<int>();
        inst.third.n_bin = tj.at("n_bin").get<int>();
        inst.third.c = dec_vec(tj.at("c"));
        inst.third.a_free = dec_mat(tj.at("a_free"));
        inst.third.b_free = dec_vec(tj.at("b_free"));
        inst.third.b_coupled = dec_mat(tj.at("b_coupled"));
        inst.third.b_x = dec_mat(tj.at("b_x"));
        inst.third.b_h = dec_mat(tj.at("b_h"));
        inst.third.b0 = dec_vec(tj.at("b0"));
        inst.third.beta_lower = dec_vec(tj.at("beta_lower"));
        inst.third.beta_upper = dec_vec(tj.at("beta_upper"));
    } catch (const json::exception& e) {
        throw ParseError(std::string("instance json: ") + e.what());
    }
    return inst;
}

WcaroInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        return instance_from_json(j);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_instance(const WcaroInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << instance_to_json(inst).dump(1) << '\n';
}

json solution_to_json(const MipSolution& sol) {
    const char* status = "optimal";
    switch (sol.status) {
        case MipStatus::Optimal: status = "optimal"; break;
        case MipStatus::Infeasible: status = "infeasible"; break;
        case MipStatus::GapLimit: status = "gap_limit"; break;
        case MipStatus::NodeLimit: status = "node_limit"; break;
    }
    return json{{"status", status},        {"objective", enc(sol.objective)},
                {"best_bound", enc(sol.best_bound)}, {"gap", enc(sol.gap)},
                {"nodes", sol.nodes},      {"primal", enc_vec(sol.primal)}};
}

json cert_to_json(const CertReport& rep) {
    return json{{"mip_value", enc(rep.mip_value)},
                {"oracle_value", enc(rep.oracle_value_at_xstar)},
                {"margin", enc(rep.margin)},
                {"exact", rep.exact},
                {"worst_h", enc_vec(rep.worst_h)},
                {"worst_yfix", rep.worst_yfix}};
}

}  // namespace aromip
