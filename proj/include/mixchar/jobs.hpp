#pragma once

/* Declarative batch jobs: parse a JSON job description, run one computation,
 * and emit a deterministic machine-readable artifact (CSV or JSON).
 *
 * Job schema (unknown fields are rejected at every level):
 *   {
 *     "ring":      {"kind": "Qp"|"LaurentFp"|"OLambdaSlope1", "p": <prime>},
 *     "group":     {"d": <int>,
 *                   "action":    {"kind": "trivial"} |
 *                                {"kind": "cyclotomic", "gammas": [<int>, ...]},
 *                   "relations": [{"j": <int>, "i": <int>,
 *                                  "exponents": [<int>, ...]}, ...]},
 *     "precision": {"N": <int>, "D": <int>, "M": <int, optional>},
 *     "task":      "bch"|"mul"|"mahler"|"classify"|"cohomology"|
 *                  "check-action"|"lambda",
 *     "params":    { task-specific, see the run_* functions below },
 *     "output":    {"format": "csv"|"json", "path": <string, optional>}
 *   }
 * "action" defaults to trivial, "relations" to none (abelian), "M" to N + D,
 * "output" to CSV on stdout.  Scalar entries in params ("t", matrix entries,
 * term coefficients) are either a JSON integer or a string in the grammar
 *   entry  := term ('+' term)*
 *   term   := INT | INT '*' 'pi' | 'pi' | INT '*' 'pi' '^' UINT | 'pi' '^' UINT
 * where pi is the uniformizer of the configured ring (p, T, or X).
 *
 * Exit-code convention carried by JobResult / thrown exceptions:
 *   0 = success, artifact written;
 *   1 = config error (schema violation, malformed JSON with line/column,
 *       unsupported combination) -- signalled by config_error;
 *   2 = invariant-violation report (a requested check failed: the artifact is
 *       still produced and JobResult.exit_code is 2) or an internal
 *       invariant_violation.
 * Artifacts are byte-identical across repeated runs and worker counts: all
 * tables are assembled single-threaded from ordered containers and contain no
 * timestamps.  Every coefficient is serialized with its precision annotation
 * ("p^v * (digits little-endian) mod p^M" and the T/X analogues). */

#include "mixchar/binomial.hpp"
#include "mixchar/complexes.hpp"
#include "mixchar/distributions.hpp"
#include "mixchar/group.hpp"
#include "mixchar/iwasawa.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mixchar {
namespace jobs {

using Json = nlohmann::ordered_json;

/* ------------------------------------------------------------------ */
/* schema helpers                                                     */
/* ------------------------------------------------------------------ */

inline std::pair<long long, long long> line_col(const std::string& text, std::size_t byte)
{
    long long line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline void expect_object(const Json& j, const std::string& ctx)
{
    if (!j.is_object()) throw config_error(ctx + ": expected a JSON object");
}

inline void expect_keys(const Json& o, const std::string& ctx,
                        std::initializer_list<const char*> allowed)
{
    expect_object(o, ctx);
    for (auto& item : o.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) ok = true;
        if (!ok) throw config_error(ctx + ": unknown field '" + item.key() + "'");
    }
}

inline const Json& need(const Json& o, const std::string& ctx, const char* key)
{
    auto it = o.find(key);
    if (it == o.end()) throw config_error(ctx + ": missing field '" + key + "'");
    return *it;
}

inline long long as_int(const Json& j, const std::string& ctx)
{
    if (!j.is_number_integer()) throw config_error(ctx + ": expected an integer");
    return j.get<long long>();
}

inline long long need_int(const Json& o, const std::string& ctx, const char* key)
{
    return as_int(need(o, ctx, key), ctx + "." + key);
}

inline std::string need_str(const Json& o, const std::string& ctx, const char* key)
{
    const Json& j = need(o, ctx, key);
    if (!j.is_string()) throw config_error(ctx + "." + key + ": expected a string");
    return j.get<std::string>();
}

inline std::optional<long long> opt_int(const Json& o, const std::string& ctx, const char* key)
{
    auto it = o.find(key);
    if (it == o.end()) return std::nullopt;
    return as_int(*it, ctx + "." + key);
}

inline std::vector<long long> int_array(const Json& j, const std::string& ctx)
{
    if (!j.is_array()) throw config_error(ctx + ": expected an array of integers");
    std::vector<long long> out;
    for (const Json& x : j) out.push_back(as_int(x, ctx));
    return out;
}

inline bool is_prime(long long p)
{
    if (p < 2) return false;
    for (long long q = 2; q * q <= p; ++q)
        if (p % q == 0) return false;
    return true;
}

/* ------------------------------------------------------------------ */
/* config model                                                       */
/* ------------------------------------------------------------------ */

struct RelationSpec {
    int j = 0;
    int i = 0;
    std::vector<long long> exponents;
};

struct JobConfig {
    RingDescriptor ring = RingDescriptor::qp(2);
    int d = 1;
    ActionKind action_kind = ActionKind::Trivial;
    std::vector<long long> gammas;
    std::vector<RelationSpec> relations;
    long long N = 1;
    long long D = 1;
    long long M = -1;  // meaningful only when M_explicit
    bool M_explicit = false;
    std::string task;
    Json params = Json::object();
    std::string format = "csv";
    std::string path;  // empty = stdout

    long long M_eff() const { return M_explicit ? M : chk_add(N, D); }
};

inline RingDescriptor parse_ring(const Json& j)
{
    expect_keys(j, "ring", {"kind", "p"});
    std::string kind = need_str(j, "ring", "kind");
    long long p = need_int(j, "ring", "p");
    if (!is_prime(p)) throw config_error("ring.p: " + std::to_string(p) + " is not prime");
    if (kind == "Qp") return RingDescriptor::qp(p);
    if (kind == "LaurentFp") return RingDescriptor::laurent(p);
    if (kind == "OLambdaSlope1") return RingDescriptor::pseudorigid(p);
    throw config_error("ring.kind: unknown ring '" + kind +
                       "' (expected Qp, LaurentFp, or OLambdaSlope1)");
}

inline JobConfig parse_config(const std::string& text)
{
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte);
        throw config_error("malformed JSON at line " + std::to_string(line) + ", column " +
                           std::to_string(col));
    }
    expect_keys(root, "config", {"ring", "group", "precision", "task", "params", "output"});

    JobConfig c;
    c.ring = parse_ring(need(root, "config", "ring"));

    const Json& g = need(root, "config", "group");
    expect_keys(g, "group", {"d", "action", "relations"});
    long long d = need_int(g, "group", "d");
    if (d < 1 || d > 64) throw config_error("group.d: dimension out of range");
    c.d = static_cast<int>(d);
    if (auto it = g.find("action"); it != g.end()) {
        expect_keys(*it, "group.action", {"kind", "gammas"});
        std::string kind = need_str(*it, "group.action", "kind");
        if (kind == "trivial") {
            c.action_kind = ActionKind::Trivial;
        } else if (kind == "cyclotomic") {
            c.action_kind = ActionKind::Cyclotomic;
            c.gammas = int_array(need(*it, "group.action", "gammas"), "group.action.gammas");
            if (c.gammas.empty()) throw config_error("group.action.gammas: must be nonempty");
        } else if (kind == "custom") {
            throw config_error(
                "group.action.kind: custom uniformizer images are not expressible in job "
                "configs; use the library API directly");
        } else {
            throw config_error("group.action.kind: unknown action '" + kind + "'");
        }
    }
    if (auto it = g.find("relations"); it != g.end()) {
        if (!it->is_array()) throw config_error("group.relations: expected an array");
        for (const Json& r : *it) {
            expect_keys(r, "group.relations[]", {"j", "i", "exponents"});
            RelationSpec rs;
            rs.j = static_cast<int>(need_int(r, "group.relations[]", "j"));
            rs.i = static_cast<int>(need_int(r, "group.relations[]", "i"));
            rs.exponents = int_array(need(r, "group.relations[]", "exponents"),
                                     "group.relations[].exponents");
            c.relations.push_back(std::move(rs));
        }
    }

    const Json& pr = need(root, "config", "precision");
    expect_keys(pr, "precision", {"N", "D", "M"});
    c.N = need_int(pr, "precision", "N");
    c.D = need_int(pr, "precision", "D");
    if (auto m = opt_int(pr, "precision", "M")) {
        c.M = *m;
        c.M_explicit = true;
    }
    if (c.N < 1) throw config_error("precision.N: must be >= 1");
    if (c.D < 0) throw config_error("precision.D: must be >= 0");

    const Json& t = need(root, "config", "task");
    if (!t.is_string()) throw config_error("task: expected a string");
    c.task = t.get<std::string>();
    static const char* tasks[] = {"bch",        "mul",          "mahler", "classify",
                                  "cohomology", "check-action", "lambda"};
    bool known = false;
    for (const char* k : tasks)
        if (c.task == k) known = true;
    if (!known) throw config_error("task: unknown task '" + c.task + "'");

    if (auto it = root.find("params"); it != root.end()) {
        expect_object(*it, "params");
        c.params = *it;
    }

    if (auto it = root.find("output"); it != root.end()) {
        expect_keys(*it, "output", {"format", "path"});
        if (auto f = it->find("format"); f != it->end()) {
            if (!f->is_string()) throw config_error("output.format: expected a string");
            c.format = f->get<std::string>();
            if (c.format != "csv" && c.format != "json")
                throw config_error("output.format: expected 'csv' or 'json'");
        }
        if (auto pth = it->find("path"); pth != it->end()) {
            if (!pth->is_string()) throw config_error("output.path: expected a string");
            c.path = pth->get<std::string>();
        }
    }
    return c;
}

/* file < environment < flags: both override layers funnel through here. */
inline void apply_precision_override(JobConfig& c, std::optional<long long> N,
                                     std::optional<long long> D)
{
    if (N) {
        if (*N < 1) throw config_error("precision override: N must be >= 1");
        c.N = *N;
    }
    if (D) {
        if (*D < 0) throw config_error("precision override: D must be >= 0");
        c.D = *D;
    }
}

/* ------------------------------------------------------------------ */
/* coefficient entries                                                */
/* ------------------------------------------------------------------ */

/* "3", "1+pi", "2*pi^3+1", "pi^2" -> exact ring element at precision prec. */
inline BElem parse_entry_string(const RingDescriptor& desc, const std::string& raw,
                                long long prec, const std::string& ctx)
{
    std::string s;
    for (char ch : raw)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw config_error(ctx + ": empty coefficient entry");

    BElem acc = BElem::zero(desc, prec);
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find('+', pos + 1);  // +1 admits a leading sign
        std::string term = s.substr(pos, next == std::string::npos ? next : next - pos);
        pos = next == std::string::npos ? s.size() : next + 1;
        if (term.empty()) throw config_error(ctx + ": empty term in coefficient entry");

        Int coeff = 1;
        long long power = 0;
        std::size_t star = term.find('*');
        std::string head = star == std::string::npos ? term : term.substr(0, star);
        std::string tail = star == std::string::npos ? "" : term.substr(star + 1);
        auto parse_pi = [&](const std::string& t) -> bool {
            if (t == "pi") {
                power = 1;
                return true;
            }
            if (t.rfind("pi^", 0) == 0) {
                const std::string expo = t.substr(3);
                if (expo.empty() ||
                    expo.find_first_not_of("0123456789") != std::string::npos)
                    throw config_error(ctx + ": bad uniformizer power in '" + term + "'");
                power = std::stoll(expo);
                return true;
            }
            return false;
        };
        auto parse_int = [&](const std::string& t) -> bool {
            std::size_t k = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
            if (k == t.size() || t.find_first_not_of("0123456789", k) != std::string::npos)
                return false;
            coeff = Int(t);
            return true;
        };
        if (star == std::string::npos) {
            if (!parse_pi(head) && !parse_int(head))
                throw config_error(ctx + ": cannot parse coefficient term '" + term + "'");
        } else {
            if (!parse_int(head) || !parse_pi(tail))
                throw config_error(ctx + ": cannot parse coefficient term '" + term + "'");
        }
        BElem t = BElem::from_int(desc, coeff, prec);
        if (power > 0) t = t.shift(power);
        acc = acc + t.reduce_prec(prec);
    }
    return acc;
}

inline BElem parse_entry(const RingDescriptor& desc, const Json& j, long long prec,
                         const std::string& ctx)
{
    if (j.is_number_integer()) return BElem::from_int(desc, Int(j.get<long long>()), prec);
    if (j.is_string()) return parse_entry_string(desc, j.get<std::string>(), prec, ctx);
    throw config_error(ctx + ": coefficient entry must be an integer or an entry string");
}

inline MultiIndex parse_index(const Json& j, int d, const std::string& ctx)
{
    std::vector<long long> v = int_array(j, ctx);
    if (static_cast<int>(v.size()) != d)
        throw config_error(ctx + ": index needs exactly " + std::to_string(d) + " entries");
    MultiIndex n(static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] < 0) throw config_error(ctx + ": index entries must be >= 0");
        n.e[k] = v[k];
    }
    return n;
}

/* ------------------------------------------------------------------ */
/* group construction                                                 */
/* ------------------------------------------------------------------ */

inline GroupPresentation build_presentation(const JobConfig& c)
{
    /* exponent digits: enough for every algebra the tasks construct */
    long long wp = std::max<long long>(40, chk_add(c.M_eff(), 8));
    ActionSpec spec;
    spec.kind = c.action_kind;
    for (long long g : c.gammas) spec.gammas.push_back(PadicInt::from_int(c.ring.p, g, wp));
    SemilinearAction act(c.ring, c.d, std::move(spec));
    std::vector<ConjRule> rules;
    for (const RelationSpec& r : c.relations) {
        ConjRule cr;
        cr.j = r.j;
        cr.i = r.i;
        for (long long e : r.exponents)
            cr.exponents.push_back(PadicInt::from_int(c.ring.p, e, wp));
        rules.push_back(std::move(cr));
    }
    return GroupPresentation(std::move(act), std::move(rules));
}

/* ------------------------------------------------------------------ */
/* artifact assembly                                                  */
/* ------------------------------------------------------------------ */

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

inline std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

/* Scalar metadata ahead of the header as '# key=value' comment lines keeps
 * the CSV self-describing without a second file. */
inline std::string to_csv(const Json& meta, const Table& t)
{
    std::string out;
    for (auto& item : meta.items()) {
        const Json& v = item.value();
        out += "# " + item.key() + "=" +
               (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
    }
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out += (i ? "," : "") + csv_escape(t.columns[i]);
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + csv_escape(row[i]);
        out += "\n";
    }
    return out;
}

inline Json base_meta(const JobConfig& c)
{
    Json m = Json::object();
    m["task"] = c.task;
    m["ring"] = c.ring.name();
    m["p"] = c.ring.p;
    m["N"] = c.N;
    m["D"] = c.D;
    m["M"] = c.M_eff();
    return m;
}

inline std::string table_artifact(const JobConfig& c, Json meta, const Table& t)
{
    if (c.format == "csv") return to_csv(meta, t);
    meta["columns"] = t.columns;
    Json rows = Json::array();
    for (const auto& row : t.rows) rows.push_back(row);
    meta["rows"] = std::move(rows);
    return meta.dump(2) + "\n";
}

struct JobResult {
    int exit_code = 0;
    std::string artifact;
};

/* ------------------------------------------------------------------ */
/* task runners                                                       */
/* ------------------------------------------------------------------ */

/* params: {"h": <int>} -- structure-constant table of the configured group's
 * h-analytic distribution algebra, one row per (k, n, m) cell. */
inline JobResult run_bch(const JobConfig& c, unsigned threads)
{
    expect_keys(c.params, "params", {"h"});
    long long h = opt_int(c.params, "params", "h").value_or(0);
    GroupPresentation pres = build_presentation(c);
    DistAlgebra A(pres, h, c.N, c.D);
    BCHTable tab = A.bch_table(threads);

    Table t;
    t.columns = {"k", "n", "m", "coefficient", "val", "bound", "margin"};
    for (const auto& [k, fam] : tab.families()) {
        for (const auto& [nm, b] : fam) {
            const auto& [n, m] = nm;
            t.rows.push_back({k.str(), n.str(), m.str(), b.str(),
                              std::to_string(b.val_floor()),
                              std::to_string(tab.bound(n, m, k)),
                              std::to_string(tab.margin(n, m, k))});
        }
    }
    Json meta = base_meta(c);
    meta["h"] = h;
    meta["entry_prec"] = tab.entry_prec();
    return {0, table_artifact(c, std::move(meta), t)};
}

/* params: {"algebra": "iwasawa"|"distribution", "h": <int, distribution only>,
 *          "x": [{"n": [..], "c": entry}, ...], "y": [...]}
 * -- product x*y in the truncated algebra, one row per reported monomial. */
inline JobResult run_mul(const JobConfig& c, unsigned /*threads*/)
{
    expect_keys(c.params, "params", {"algebra", "h", "x", "y"});
    std::string which = need_str(c.params, "params", "algebra");
    const Json& xj = need(c.params, "params", "x");
    const Json& yj = need(c.params, "params", "y");
    if (!xj.is_array() || !yj.is_array())
        throw config_error("params.x / params.y: expected arrays of terms");
    GroupPresentation pres = build_presentation(c);

    Table t;
    t.columns = {"n", "coefficient"};
    Json meta = base_meta(c);
    meta["algebra"] = which;

    if (which == "iwasawa") {
        if (c.params.contains("h"))
            throw config_error("params.h: only meaningful for algebra='distribution'");
        IwasawaAlgebra A(pres, c.M_explicit ? PrecisionCtx(c.N, c.D, c.M)
                                            : PrecisionCtx(c.N, c.D));
        auto build = [&](const Json& terms, const char* ctx) {
            IwasawaElem z = A.zero();
            for (const Json& tj : terms) {
                expect_keys(tj, ctx, {"n", "c"});
                MultiIndex n = parse_index(need(tj, ctx, "n"), c.d, std::string(ctx) + ".n");
                BElem b = parse_entry(c.ring, need(tj, ctx, "c"), c.N, std::string(ctx) + ".c");
                z = A.add(z, A.monomial(b, n));
            }
            return z;
        };
        IwasawaElem z = A.reported(A.mul(build(xj, "params.x[]"), build(yj, "params.y[]")));
        for (const auto& [n, b] : z.coeffs()) t.rows.push_back({n.str(), b.str()});
        return {0, table_artifact(c, std::move(meta), t)};
    }
    if (which == "distribution") {
        long long h = opt_int(c.params, "params", "h").value_or(0);
        meta["h"] = h;
        DistAlgebra A(pres, h, c.N, c.D);
        auto build = [&](const Json& terms, const char* ctx) {
            DistElem z = A.zero();
            for (const Json& tj : terms) {
                expect_keys(tj, ctx, {"n", "c"});
                MultiIndex n = parse_index(need(tj, ctx, "n"), c.d, std::string(ctx) + ".n");
                BElem b = parse_entry(c.ring, need(tj, ctx, "c"), c.N, std::string(ctx) + ".c");
                z = A.add(z, A.monomial(b, n));
            }
            return z;
        };
        DistElem z = A.mul(build(xj, "params.x[]"), build(yj, "params.y[]"));
        meta["tail_gauge"] = z.tail_gauge() ? Json(*z.tail_gauge()) : Json(nullptr);
        for (const auto& [n, b] : z.coeffs()) t.rows.push_back({n.str(), b.str()});
        return {0, table_artifact(c, std::move(meta), t)};
    }
    throw config_error("params.algebra: expected 'iwasawa' or 'distribution'");
}

/* params: {"values": [entry, ...]} -- interpolation data f(0..k) -> binomial
 * coefficient series, verified by evaluating back at every input point. */
inline JobResult run_mahler(const JobConfig& c, unsigned /*threads*/)
{
    expect_keys(c.params, "params", {"values"});
    const Json& vj = need(c.params, "params", "values");
    if (!vj.is_array() || vj.empty())
        throw config_error("params.values: expected a nonempty array");
    std::vector<BElem> vals;
    for (const Json& x : vj) vals.push_back(parse_entry(c.ring, x, c.N, "params.values[]"));
    BinSeries s = mahler_transform(vals);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        BElem back = evaluate_at_int(s, Int(static_cast<long long>(i)));
        if (!agree(back, vals[i]))
            throw invariant_violation("mahler: roundtrip mismatch at x=" + std::to_string(i));
    }
    Table t;
    t.columns = {"n", "coefficient"};
    for (const auto& [n, b] : s.coeffs) t.rows.push_back({n.str(), b.str()});
    Json meta = base_meta(c);
    meta["convention"] = convention_name(s.conv);
    meta["support_cap"] = s.D;
    meta["roundtrip"] = "exact";
    return {0, table_artifact(c, std::move(meta), t)};
}

/* params: {"h": <int>, "window": <int>,
 *          "series": "lambda-T" | [{"n": [..], "c": entry}, ...]}
 * -- windowed analyticity margins of a binomial coefficient series.
 * "lambda-T" is the built-in series with b_n = pi^n (n = 0..D). */
inline JobResult run_classify(const JobConfig& c, unsigned /*threads*/)
{
    expect_keys(c.params, "params", {"h", "window", "series"});
    long long h = opt_int(c.params, "params", "h").value_or(0);
    long long w = opt_int(c.params, "params", "window").value_or(c.D);
    const Json& sj = need(c.params, "params", "series");

    BinSeries s;
    std::string series_name;
    if (sj.is_string() && sj.get<std::string>() == "lambda-T") {
        series_name = "lambda-T";
        s = BinSeries(c.ring, 1, c.D, BinConvention::Bin);
        for (long long n = 0; n <= c.D; ++n)
            s.set(MultiIndex{n}, BElem::one(c.ring, c.N).shift(n));
    } else if (sj.is_array()) {
        series_name = "explicit";
        s = BinSeries(c.ring, c.d, c.D, BinConvention::Bin);
        for (const Json& tj : sj) {
            expect_keys(tj, "params.series[]", {"n", "c"});
            MultiIndex n = parse_index(need(tj, "params.series[]", "n"), c.d,
                                       "params.series[].n");
            s.set(n, parse_entry(c.ring, need(tj, "params.series[]", "c"), c.N,
                                 "params.series[].c"));
        }
    } else {
        throw config_error("params.series: expected \"lambda-T\" or an array of terms");
    }

    AnalyticityReport rep = classify_analyticity(s, h, w);
    Table t;
    t.columns = {"weight", "margin_upper", "margin_lower"};
    for (std::size_t i = 0; i < rep.margins_upper.size(); ++i) {
        auto fmt = [](const std::optional<long long>& m) {
            return m ? std::to_string(*m) : std::string("absent");
        };
        t.rows.push_back({std::to_string(rep.margins_upper[i].first),
                          fmt(rep.margins_upper[i].second),
                          fmt(rep.margins_lower[i].second)});
    }
    Json meta = base_meta(c);
    meta["series"] = series_name;
    meta["h"] = h;
    meta["window"] = w;
    meta["window_lo"] = rep.window_lo;
    meta["window_hi"] = rep.window_hi;
    meta["h_upper_analytic"] = rep.is_h_upper;
    meta["h_lower_analytic"] = rep.is_h_lower;
    std::string verdict = "h=" + std::to_string(h);
    verdict += rep.is_h_upper && rep.is_h_lower ? " analytic"
               : rep.is_h_lower                 ? " lower-analytic only"
               : rep.is_h_upper                 ? " upper-analytic only"
                                                : " not analytic at desk scale";
    meta["verdict"] = verdict;
    return {0, table_artifact(c, std::move(meta), t)};
}

/* params: {"module": [matrix, ...] (one r x r matrix of entries per
 *          generator), "choice": "continuous"|"h-analytic", "h": <int>}
 * -- group cohomology of the module; JSON reports follow the schema
 * {degree, divisors, ranks, tail_bound} per degree. */
inline JobResult run_cohomology(const JobConfig& c, unsigned threads)
{
    expect_keys(c.params, "params", {"module", "choice", "h"});
    const Json& mj = need(c.params, "params", "module");
    if (!mj.is_array() || static_cast<int>(mj.size()) != c.d)
        throw config_error("params.module: expected one matrix per generator (" +
                           std::to_string(c.d) + ")");
    std::string choice_s = c.params.contains("choice")
                               ? need_str(c.params, "params", "choice")
                               : std::string("continuous");
    CoeffChoice choice;
    if (choice_s == "continuous")
        choice = CoeffChoice::Continuous;
    else if (choice_s == "h-analytic")
        choice = CoeffChoice::HAnalytic;
    else
        throw config_error("params.choice: expected 'continuous' or 'h-analytic'");
    long long h = opt_int(c.params, "params", "h").value_or(0);

    long long prec = std::max(c.N, c.M_eff());
    std::vector<BMatrix> mats;
    for (const Json& mat : mj) {
        if (!mat.is_array() || mat.empty())
            throw config_error("params.module[]: expected a nonempty matrix");
        BMatrix m;
        for (const Json& row : mat) {
            if (!row.is_array() || row.size() != mat.size())
                throw config_error("params.module[]: matrix must be square");
            BVector r;
            for (const Json& e : row)
                r.push_back(parse_entry(c.ring, e, prec, "params.module[][][]"));
            m.push_back(std::move(r));
        }
        mats.push_back(std::move(m));
    }

    GroupPresentation pres = build_presentation(c);
    CohomologyReport rep = cohomology(pres, mats, c.N, choice, h, threads);

    Json meta = base_meta(c);
    meta["choice"] = choice_s;
    meta["kind"] = rep.kind == CohomKind::ChainRingDivisors   ? "chain-ring-divisors"
                   : rep.kind == CohomKind::ResidueLinearized ? "residue-linearized"
                                                              : "residue-polynomial";
    meta["module_rank"] = rep.module_rank;
    if (choice == CoeffChoice::HAnalytic) {
        meta["h"] = rep.h;
        meta["h_certified"] = rep.h_certified;
    }
    meta["euler"] = rep.euler;

    if (c.format == "csv") {
        Table t;
        t.columns = {"degree", "length",         "free_rank", "fp_dim",
                     "divisors", "torsion_degrees", "tail_bound"};
        auto join = [](const std::vector<long long>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i)
                s += (i ? "|" : "") + std::to_string(v[i]);
            return s;
        };
        for (const DegreeReport& dr : rep.degrees)
            t.rows.push_back({std::to_string(dr.degree), std::to_string(dr.length),
                              std::to_string(dr.free_rank), std::to_string(dr.fp_dim),
                              join(dr.divisors), join(dr.torsion_degrees),
                              std::to_string(dr.tail_bound)});
        return {0, to_csv(meta, t)};
    }
    Json degrees = Json::array();
    for (const DegreeReport& dr : rep.degrees) {
        Json dj = Json::object();
        dj["degree"] = dr.degree;
        dj["divisors"] = dr.divisors;
        Json ranks = Json::object();
        ranks["length"] = dr.length;
        ranks["free"] = dr.free_rank;
        ranks["fp_dim"] = dr.fp_dim;
        ranks["torsion_degrees"] = dr.torsion_degrees;
        dj["ranks"] = std::move(ranks);
        dj["tail_bound"] = dr.tail_bound;
        degrees.push_back(std::move(dj));
    }
    meta["degrees"] = std::move(degrees);
    return {0, meta.dump(2) + "\n"};
}

/* params: {} -- local-analyticity check of the configured action at depth N.
 * Violations are reported (one row each) and flagged with exit code 2. */
inline JobResult run_check_action(const JobConfig& c, unsigned /*threads*/)
{
    expect_keys(c.params, "params", {});
    /* validate=false so that out-of-catalog specs are reported, not rejected */
    ActionSpec spec;
    spec.kind = c.action_kind;
    long long wp = std::max<long long>(40, chk_add(c.M_eff(), 8));
    for (long long g : c.gammas) spec.gammas.push_back(PadicInt::from_int(c.ring.p, g, wp));
    SemilinearAction act(c.ring, c.d, std::move(spec), /*validate=*/false);
    ActionCheckReport rep = act.check_local_analyticity(c.N);

    Table t;
    t.columns = {"generator", "monomial", "level"};
    for (const ActionViolation& v : rep.violations)
        t.rows.push_back({std::to_string(v.generator), v.monomial, std::to_string(v.level)});
    Json meta = base_meta(c);
    meta["ok"] = rep.ok;
    meta["first_violation_level"] = rep.ok ? Json(nullptr) : Json(rep.first_violation_level);
    return {rep.ok ? 0 : 2, table_artifact(c, std::move(meta), t)};
}

/* params: {"t": entry (val >= 1), "x": <int>, "y": <int, optional>}
 * -- character values lambda_t(x) via binomial expansion; with y present the
 * multiplicativity probe lambda(x)*lambda(y) = lambda(x+y) is reported and a
 * failure is flagged with exit code 2. */
inline JobResult run_lambda(const JobConfig& c, unsigned /*threads*/)
{
    expect_keys(c.params, "params", {"t", "x", "y"});
    long long prec = std::max(c.N, c.M_eff());
    BElem t = c.params.contains("t")
                  ? parse_entry(c.ring, c.params.at("t"), prec, "params.t")
                  : BElem::uniformizer(c.ring, prec);
    long long x = need_int(c.params, "params", "x");
    std::optional<long long> y = opt_int(c.params, "params", "y");
    long long ep = std::max<long long>(40, chk_add(c.M_eff(), 8));

    auto lam = [&](long long v) {
        return lambda_character(t, PadicInt::from_int(c.ring.p, Int(v), ep), c.N);
    };
    Table tab;
    tab.columns = {"argument", "value"};
    BElem lx = lam(x);
    tab.rows.push_back({std::to_string(x), lx.str()});
    Json meta = base_meta(c);
    meta["t"] = t.str();
    int code = 0;
    if (y) {
        BElem ly = lam(*y);
        BElem lxy = lam(chk_add(x, *y));
        tab.rows.push_back({std::to_string(*y), ly.str()});
        tab.rows.push_back({std::to_string(chk_add(x, *y)), lxy.str()});
        bool mult = agree(lx * ly, lxy);
        meta["multiplicative"] = mult;
        if (!mult) code = 2;
    }
    return {code, table_artifact(c, std::move(meta), tab)};
}

inline JobResult run(const JobConfig& c, unsigned threads = 0)
{
    if (c.task == "bch") return run_bch(c, threads);
    if (c.task == "mul") return run_mul(c, threads);
    if (c.task == "mahler") return run_mahler(c, threads);
    if (c.task == "classify") return run_classify(c, threads);
    if (c.task == "cohomology") return run_cohomology(c, threads);
    if (c.task == "check-action") return run_check_action(c, threads);
    if (c.task == "lambda") return run_lambda(c, threads);
    throw config_error("task: unknown task '" + c.task + "'");
}

/* ------------------------------------------------------------------ */
/* selftest                                                           */
/* ------------------------------------------------------------------ */

struct SelftestCheck {
    std::string name;
    bool pass = false;
};

struct SelftestReport {
    std::vector<SelftestCheck> checks;
    bool all_pass() const
    {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/* Small-cap invariant suite.  inject_fault (test-only) flips the character
 * check so failure paths of callers can be exercised. */
inline SelftestReport selftest(bool inject_fault = false)
{
    SelftestReport rep;
    auto add = [&](const std::string& name, bool pass) {
        rep.checks.push_back({name, pass});
    };

    {
        bool ok = true;
        for (long long p : {2, 3})
            for (int h = 0; h <= 2 && ok; ++h)
                for (long long w = 1; w <= 24 && ok; ++w) {
                    long long step = u_h(p, h, w) - u_h(p, h, w - 1);
                    if (step < 0 || step > 1) ok = false;
                    MultiIndex n{w};
                    if (v_upper(p, h, n) > v_lower(p, h, n) + 1) ok = false;
                }
        add("valuation-step-and-sandwich", ok);
    }
    {
        bool ok = true;
        try {
            for (long long p : {2, 3}) {
                RingDescriptor desc = RingDescriptor::qp(p);
                BElem t = BElem::uniformizer(desc, 12);
                auto lam = [&](long long v) {
                    return lambda_character(t, PadicInt::from_int(p, v, 40), 5);
                };
                if (!agree(lam(2) * lam(3), lam(5))) ok = false;
            }
        } catch (const std::exception&) {
            ok = false;
        }
        if (inject_fault) ok = !ok;
        add("character-multiplicative", ok);
    }
    {
        bool ok = true;
        try {
            RingDescriptor desc = RingDescriptor::laurent(2);
            BElem t = BElem::uniformizer(desc, 6);
            BElem lam3 = lambda_character(t, PadicInt::from_int(2, 3, 40), 6);
            BElem one = BElem::one(desc, 6);
            BElem opt = one + BElem::uniformizer(desc, 6).reduce_prec(6);
            if (!agree(lam3, opt * opt * opt)) ok = false;
        } catch (const std::exception&) {
            ok = false;
        }
        add("character-equals-geometric-power", ok);
    }
    {
        bool ok = true;
        try {
            SemilinearAction act = SemilinearAction::trivial(RingDescriptor::qp(2), 1);
            GroupPresentation pres = GroupPresentation::abelian(act);
            IwasawaAlgebra A(pres, PrecisionCtx(3, 2));
            ChainComplex C = lazard_serre(A);
            IwasawaElem m = A.monomial(BElem::one(pres.descriptor(), 3), MultiIndex{1});
            auto v = C.single(1, {1}, m);
            auto lhs = C.contract(1, v);
            auto rhs = C.scaled(1, v);
            for (std::size_t s = 0; s < lhs.size(); ++s)
                if (!A.agree_elems(lhs[s], rhs[s])) ok = false;
        } catch (const std::exception&) {
            ok = false;
        }
        add("homotopy-contraction-identity", ok);
    }
    {
        bool ok = true;
        try {
            SemilinearAction act = SemilinearAction::trivial(RingDescriptor::qp(2), 1);
            GroupPresentation pres = GroupPresentation::abelian(act);
            DistAlgebra A(pres, 0, 4, 2);
            AnalyticChainComplex C = kohlhaase(A);
            PoleBudgetReport pb = certify_pole_budget(C);
            if (!pb.ok || pb.pole != 1) ok = false;
        } catch (const std::exception&) {
            ok = false;
        }
        add("distribution-pole-budget", ok);
    }
    {
        bool ok = true;
        try {
            SemilinearAction act = SemilinearAction::trivial(RingDescriptor::qp(2), 1);
            GroupPresentation pres = GroupPresentation::abelian(act);
            DistAlgebra A(pres, 0, 4, 2);
            BCHTable tab = A.bch_table();
            for (const auto& [k, fam] : tab.families())
                for (const auto& [nm, b] : fam)
                    if (tab.margin(nm.first, nm.second, k) < 0) ok = false;
        } catch (const std::exception&) {
            ok = false;
        }
        add("bch-margins-nonnegative", ok);
    }
    return rep;
}

inline std::string selftest_text(const SelftestReport& rep)
{
    std::string out;
    for (const auto& c : rep.checks) out += (c.pass ? "ok   " : "FAIL ") + c.name + "\n";
    out += rep.all_pass() ? "all checks passed\n" : "some checks FAILED\n";
    return out;
}

inline std::string selftest_json(const SelftestReport& rep)
{
    Json j = Json::object();
    Json arr = Json::array();
    for (const auto& c : rep.checks) {
        Json cj = Json::object();
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        arr.push_back(std::move(cj));
    }
    j["checks"] = std::move(arr);
    j["all_pass"] = rep.all_pass();
    return j.dump(2) + "\n";
}

}  // namespace jobs
}  // namespace mixchar
