/* Batch front door: config schema, entry grammar, task artifacts,
 * deterministic output, precedence of precision overrides, exit codes, and
 * the embedded selftest -- exercised both through the jobs API and through
 * the installed binary (paths injected by the build). */

#include "mixchar/jobs.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using namespace mixchar;
using namespace mixchar::jobs;

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string config_path(const std::string& name)
{
    return std::string(MIXCHAR_CONFIG_DIR) + "/" + name;
}

JobConfig load(const std::string& name)
{
    return parse_config(slurp(config_path(name)));
}

/* Spawn the CLI binary through the shell; capture exit code, stdout, stderr. */
struct RunOut {
    int code = -1;
    std::string out;
    std::string err;
};

RunOut run_cli(const std::string& args, const std::string& env_prefix = "")
{
    static int seq = 0;
    std::string tag = testing::TempDir() + "cli_" + std::to_string(++seq);
    std::string cmd = env_prefix + (env_prefix.empty() ? "" : " ") + MIXCHAR_CLI_BIN + " " +
                      args + " >" + tag + ".out 2>" + tag + ".err";
    int rc = std::system(cmd.c_str());
    RunOut r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(tag + ".out");
    r.err = slurp(tag + ".err");
    std::remove((tag + ".out").c_str());
    std::remove((tag + ".err").c_str());
    return r;
}

std::string write_temp(const std::string& text)
{
    static int seq = 0;
    std::string path = testing::TempDir() + "cfg_" + std::to_string(++seq) + ".json";
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

const char* kMinimal =
    R"({"ring": {"kind": "Qp", "p": 2}, "group": {"d": 1},
        "precision": {"N": 3, "D": 1}, "task": "lambda", "params": {"x": 1}})";

/* ---------------- schema ---------------- */

TEST(CliConfig, ParsesFullConfig)
{
    JobConfig c = load("bch_semidirect_q2.json");
    EXPECT_EQ(c.ring.kind, RingKind::Qp);
    EXPECT_EQ(c.ring.p, 2);
    EXPECT_EQ(c.d, 2);
    EXPECT_EQ(c.relations.size(), 1u);
    EXPECT_EQ(c.relations[0].j, 2);
    EXPECT_EQ(c.relations[0].exponents, (std::vector<long long>{5}));
    EXPECT_EQ(c.N, 6);
    EXPECT_EQ(c.D, 3);
    EXPECT_EQ(c.M_eff(), 9);
    EXPECT_EQ(c.task, "bch");
    EXPECT_EQ(c.format, "csv");
}

TEST(CliConfig, RejectsUnknownFieldsEverywhere)
{
    auto bad = [](const std::string& text, const std::string& needle) {
        try {
            JobConfig c = parse_config(text);
            run(c);
            FAIL() << "accepted: " << text;
        } catch (const config_error& e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    bad(R"({"ring": {"kind": "Qp", "p": 2}, "group": {"d": 1},
            "precision": {"N": 3, "D": 1}, "task": "lambda", "params": {"x": 1},
            "bogus": 0})",
        "unknown field 'bogus'");
    bad(R"({"ring": {"kind": "Qp", "p": 2, "q": 3}, "group": {"d": 1},
            "precision": {"N": 3, "D": 1}, "task": "lambda", "params": {"x": 1}})",
        "unknown field 'q'");
    bad(R"({"ring": {"kind": "Qp", "p": 2}, "group": {"d": 1, "rank": 1},
            "precision": {"N": 3, "D": 1}, "task": "lambda", "params": {"x": 1}})",
        "unknown field 'rank'");
    bad(R"({"ring": {"kind": "Qp", "p": 2},
            "group": {"d": 1, "action": {"kind": "trivial", "size": 2}},
            "precision": {"N": 3, "D": 1}, "task": "lambda", "params": {"x": 1}})",
        "unknown field 'size'");
    bad(R"({"ring": {"kind": "Qp", "p": 2}, "group": {"d": 1},
            "precision": {"N": 3, "D": 1, "K": 4}, "task": "lambda",
            "params": {"x": 1}})",
        "unknown field 'K'");
    bad(R"({"ring": {"kind": "Qp", "p": 2}, "group": {"d": 1},
            "precision": {"N": 3, "D": 1}, "task": "lambda", "params": {"x": 1},
            "output": {"format": "csv", "append": true}})",
        "unknown field 'append'");
    /* params are validated by the task runner */
    bad(R"({"ring": {"kind": "Qp", "p": 2}, "group": {"d": 1},
            "precision": {"N": 3, "D": 1}, "task": "lambda",
            "params": {"x": 1, "base": 7}})",
        "unknown field 'base'");
}

TEST(CliConfig, RejectsBadValues)
{
    EXPECT_THROW(parse_config(R"({"ring": {"kind": "Zp", "p": 2}, "group": {"d": 1},
                                  "precision": {"N": 3, "D": 1}, "task": "lambda"})"),
                 config_error);
    EXPECT_THROW(parse_config(R"({"ring": {"kind": "Qp", "p": 6}, "group": {"d": 1},
                                  "precision": {"N": 3, "D": 1}, "task": "lambda"})"),
                 config_error);
    EXPECT_THROW(parse_config(R"({"ring": {"kind": "Qp", "p": 2}, "group": {"d": 1},
                                  "precision": {"N": 0, "D": 1}, "task": "lambda"})"),
                 config_error);
    EXPECT_THROW(parse_config(R"({"ring": {"kind": "Qp", "p": 2}, "group": {"d": 1},
                                  "precision": {"N": 3, "D": 1}, "task": "sing"})"),
                 config_error);
    EXPECT_THROW(parse_config(R"({"ring": {"kind": "Qp", "p": 2}, "group": {"d": 1},
                                  "precision": {"N": 3, "D": 1}, "task": "lambda",
                                  "output": {"format": "xml"}})"),
                 config_error);
    /* custom actions are a library-only feature */
    EXPECT_THROW(parse_config(R"({"ring": {"kind": "LaurentFp", "p": 2},
                                  "group": {"d": 1, "action": {"kind": "custom"}},
                                  "precision": {"N": 3, "D": 1}, "task": "lambda"})"),
                 config_error);
}

TEST(CliConfig, MalformedJsonReportsLineAndColumn)
{
    try {
        parse_config("{\n  \"ring\": {\"kind\": \"Qp\", \"p\": 2,}\n}");
        FAIL();
    } catch (const config_error& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("malformed JSON"), std::string::npos) << msg;
        EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
        EXPECT_NE(msg.find("column"), std::string::npos) << msg;
    }
}

TEST(CliConfig, PrecisionOverridePrecedence)
{
    JobConfig c = parse_config(kMinimal);
    EXPECT_EQ(c.N, 3);
    /* environment layer */
    apply_precision_override(c, 5, std::nullopt);
    EXPECT_EQ(c.N, 5);
    EXPECT_EQ(c.D, 1);
    /* flag layer wins */
    apply_precision_override(c, 4, 2);
    EXPECT_EQ(c.N, 4);
    EXPECT_EQ(c.D, 2);
    EXPECT_EQ(c.M_eff(), 6);  // default M tracks the overridden values
    EXPECT_THROW(apply_precision_override(c, 0, std::nullopt), config_error);
}

/* ---------------- entry grammar ---------------- */

TEST(CliConfig, EntryGrammar)
{
    RingDescriptor q3 = RingDescriptor::qp(3);
    EXPECT_TRUE(agree(parse_entry_string(q3, "2+pi", 5, "t"), BElem::from_int(q3, 5, 5)));
    EXPECT_TRUE(agree(parse_entry_string(q3, "2*pi^2+1", 5, "t"), BElem::from_int(q3, 19, 5)));
    EXPECT_TRUE(agree(parse_entry_string(q3, " 1 + pi ", 5, "t"), BElem::from_int(q3, 4, 5)));
    EXPECT_TRUE(agree(parse_entry_string(q3, "-1", 5, "t"), BElem::from_int(q3, -1, 5)));
    EXPECT_TRUE(agree(parse_entry_string(q3, "pi^2", 5, "t"),
                      BElem::uniformizer(q3, 5).shift(1).reduce_prec(5)));

    RingDescriptor l2 = RingDescriptor::laurent(2);
    BElem e = parse_entry_string(l2, "1+pi", 4, "t");
    EXPECT_TRUE(agree(e, BElem::one(l2, 4) + BElem::uniformizer(l2, 4).reduce_prec(4)));

    EXPECT_THROW(parse_entry_string(q3, "", 5, "t"), config_error);
    EXPECT_THROW(parse_entry_string(q3, "2*", 5, "t"), config_error);
    EXPECT_THROW(parse_entry_string(q3, "pi^x", 5, "t"), config_error);
    EXPECT_THROW(parse_entry_string(q3, "foo", 5, "t"), config_error);
    EXPECT_THROW(parse_entry_string(q3, "pi*pi", 5, "t"), config_error);
}

/* ---------------- task artifacts ---------------- */

TEST(CliTasks, MulIwasawaPinned)
{
    JobResult r = run(load("mul_iwasawa_q3.json"));
    EXPECT_EQ(r.exit_code, 0);
    /* (c1 + 5 c2)(2 c1 c2 + 9) = 2 c1^2 c2 + 9 c1 + 10 c1 c2^2 + 45 c2 */
    EXPECT_NE(r.artifact.find("\"(0,1)\",\"3^2 * (2,1) mod 3^5\""), std::string::npos);
    EXPECT_NE(r.artifact.find("\"(1,0)\",3^2 * (1) mod 3^5"), std::string::npos);
    EXPECT_NE(r.artifact.find("\"(1,2)\",\"3^0 * (1,0,1) mod 3^5\""), std::string::npos);
    EXPECT_NE(r.artifact.find("\"(2,1)\",3^0 * (2) mod 3^5"), std::string::npos);
}

TEST(CliTasks, MahlerGeometricPinned)
{
    JobResult r = run(load("mahler_qp.json"));
    EXPECT_EQ(r.exit_code, 0);
    Json j = Json::parse(r.artifact);
    EXPECT_EQ(j.at("roundtrip"), "exact");
    EXPECT_EQ(j.at("convention"), "Bin");
    ASSERT_EQ(j.at("rows").size(), 4u);
    /* forward differences of 2^x are identically 1 */
    for (const auto& row : j.at("rows")) EXPECT_EQ(row.at(1), "2^0 * (1) mod 2^8");
}

TEST(CliTasks, ClassifyLambdaTPinned)
{
    JobResult r = run(load("classify_lambda_t.json"));
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.artifact.find("# verdict=h=0 analytic"), std::string::npos);
    EXPECT_NE(r.artifact.find("# h_lower_analytic=true"), std::string::npos);
    /* b_n = T^n sits exactly on the h=0 lower floor: margin 0 at every weight */
    EXPECT_NE(r.artifact.find("4,1,0"), std::string::npos);
    EXPECT_NE(r.artifact.find("8,1,0"), std::string::npos);
}

TEST(CliTasks, CohomologyJsonSchema)
{
    JobResult r = run(load("cohomology_trivial_rank1.json"));
    EXPECT_EQ(r.exit_code, 0);
    Json j = Json::parse(r.artifact);
    EXPECT_EQ(j.at("kind"), "chain-ring-divisors");
    EXPECT_EQ(j.at("euler"), 0);
    ASSERT_EQ(j.at("degrees").size(), 2u);
    for (const auto& dj : j.at("degrees")) {
        ASSERT_TRUE(dj.contains("degree"));
        ASSERT_TRUE(dj.contains("divisors"));
        ASSERT_TRUE(dj.contains("ranks"));
        ASSERT_TRUE(dj.contains("tail_bound"));
        /* trivial rank-1: H^0 = H^1 = full ring mod pi^N */
        EXPECT_EQ(dj.at("divisors"), Json::array({5}));
        EXPECT_EQ(dj.at("tail_bound"), 5);
    }
}

TEST(CliTasks, CohomologyTwistedLaurentPinned)
{
    JobResult r = run(load("cohomology_twisted_laurent.json"));
    EXPECT_EQ(r.exit_code, 0);
    Json j = Json::parse(r.artifact);
    EXPECT_EQ(j.at("kind"), "residue-linearized");
    for (const auto& dj : j.at("degrees")) EXPECT_EQ(dj.at("ranks").at("fp_dim"), 4);
}

TEST(CliTasks, BchTablePinnedAndMarginNonnegative)
{
    JobConfig c = load("bch_semidirect_q2.json");
    JobResult r = run(c);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.artifact.find("k,n,m,coefficient,val,bound,margin"), std::string::npos);
    /* c^(0,0) appears only as 1*1 */
    EXPECT_NE(r.artifact.find("\"(0,0)\",\"(0,0)\",\"(0,0)\",2^0 * (1) mod 2^12,0,0,0"),
              std::string::npos);
    std::istringstream is(r.artifact);
    std::string line;
    int rows = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'k') continue;
        auto tail = line.rfind(',');
        ASSERT_NE(tail, std::string::npos);
        EXPECT_GE(std::stoll(line.substr(tail + 1)), 0) << line;
        ++rows;
    }
    EXPECT_GT(rows, 50);
}

TEST(CliTasks, CheckActionViolationExitsTwo)
{
    JobConfig c = parse_config(
        R"({"ring": {"kind": "LaurentFp", "p": 3},
            "group": {"d": 1, "action": {"kind": "cyclotomic", "gammas": [2]}},
            "precision": {"N": 4, "D": 1}, "task": "check-action", "params": {}})");
    JobResult r = run(c);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.artifact.find("# ok=false"), std::string::npos);
    EXPECT_NE(r.artifact.find("1,T^1,1"), std::string::npos);

    JobResult good = run(load("check_action_cyclotomic.json"));
    EXPECT_EQ(good.exit_code, 0);
    EXPECT_NE(good.artifact.find("# ok=true"), std::string::npos);
}

TEST(CliTasks, LambdaMultiplicativePinned)
{
    JobResult r = run(load("lambda_character_q2.json"));
    EXPECT_EQ(r.exit_code, 0);
    /* lambda_2(x) = 3^x: 27, 243, 6561 mod 2^6 */
    EXPECT_NE(r.artifact.find("3,\"2^0 * (1,1,0,1,1) mod 2^6\""), std::string::npos);
    EXPECT_NE(r.artifact.find("5,\"2^0 * (1,1,0,0,1,1) mod 2^6\""), std::string::npos);
    EXPECT_NE(r.artifact.find("8,\"2^0 * (1,0,0,0,0,1) mod 2^6\""), std::string::npos);
    EXPECT_NE(r.artifact.find("# multiplicative=true"), std::string::npos);
}

TEST(CliTasks, UnsupportedCombinationIsConfigError)
{
    /* twisted pseudorigid cohomology is rejected, not computed */
    JobConfig c = parse_config(
        R"({"ring": {"kind": "OLambdaSlope1", "p": 2},
            "group": {"d": 1, "action": {"kind": "cyclotomic", "gammas": [3]}},
            "precision": {"N": 3, "D": 2}, "task": "cohomology",
            "params": {"module": [[[1]]]}})");
    EXPECT_THROW(run(c), config_error);
}

/* ---------------- determinism ---------------- */

TEST(CliDeterminism, ByteIdenticalAcrossRunsAndThreads)
{
    JobConfig c = load("bch_semidirect_q2.json");
    JobResult a = run(c, 0);
    JobResult b = run(c, 1);
    JobResult d = run(c, 4);
    EXPECT_EQ(a.artifact, b.artifact);
    EXPECT_EQ(a.artifact, d.artifact);
    EXPECT_EQ(a.artifact, run(c, 0).artifact);

    JobConfig ch = load("cohomology_twisted_laurent.json");
    EXPECT_EQ(run(ch, 1).artifact, run(ch, 4).artifact);
}

/* ---------------- selftest ---------------- */

TEST(CliSelftest, PassesAndReportsFault)
{
    SelftestReport rep = selftest(false);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_GE(rep.checks.size(), 5u);

    SelftestReport bad = selftest(true);
    EXPECT_FALSE(bad.all_pass());

    Json j = Json::parse(selftest_json(rep));
    EXPECT_TRUE(j.at("all_pass").get<bool>());
    EXPECT_EQ(j.at("checks").size(), rep.checks.size());
}

/* ---------------- binary end-to-end ---------------- */

TEST(CliBinary, SelftestExitCodes)
{
    RunOut ok = run_cli("selftest");
    EXPECT_EQ(ok.code, 0);
    EXPECT_NE(ok.out.find("all checks passed"), std::string::npos);

    RunOut fault = run_cli("selftest --inject-fault --json");
    EXPECT_EQ(fault.code, 2);
    Json j = Json::parse(fault.out);
    EXPECT_FALSE(j.at("all_pass").get<bool>());
}

TEST(CliBinary, ExitCodesAndStderr)
{
    std::string bad = write_temp("{\n  \"ring\": oops\n}");
    RunOut r = run_cli("lambda --config " + bad);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("column"), std::string::npos) << r.err;

    RunOut miss = run_cli("lambda --config " + std::string(MIXCHAR_CONFIG_DIR) +
                          "/does_not_exist.json");
    EXPECT_EQ(miss.code, 1);

    /* subcommand and config task must agree */
    RunOut mism = run_cli("mul --config " + config_path("lambda_character_q2.json"));
    EXPECT_EQ(mism.code, 1);
    EXPECT_NE(mism.err.find("task mismatch"), std::string::npos) << mism.err;

    RunOut viol = run_cli(
        "check-action --config " +
        write_temp(R"({"ring": {"kind": "LaurentFp", "p": 3},
                       "group": {"d": 1, "action": {"kind": "cyclotomic", "gammas": [2]}},
                       "precision": {"N": 4, "D": 1}, "task": "check-action",
                       "params": {}})"));
    EXPECT_EQ(viol.code, 2);
}

TEST(CliBinary, EnvironmentAndFlagPrecedence)
{
    std::string cfg = config_path("lambda_character_q2.json");
    RunOut file_only = run_cli("lambda --config " + cfg);
    EXPECT_NE(file_only.out.find("# N=6"), std::string::npos);

    RunOut env = run_cli("lambda --config " + cfg, "MIXCHAR_N=4");
    EXPECT_NE(env.out.find("# N=4"), std::string::npos);
    EXPECT_NE(env.out.find("mod 2^4"), std::string::npos);

    RunOut flag = run_cli("lambda --config " + cfg + " -N 3", "MIXCHAR_N=4");
    EXPECT_NE(flag.out.find("# N=3"), std::string::npos);

    RunOut badenv = run_cli("lambda --config " + cfg, "MIXCHAR_N=tall");
    EXPECT_EQ(badenv.code, 1);
    EXPECT_NE(badenv.err.find("MIXCHAR_N"), std::string::npos);
}

TEST(CliBinary, WritesArtifactFileAndHonorsFormatFlag)
{
    std::string out = testing::TempDir() + "artifact.json";
    RunOut r = run_cli("mul --config " + config_path("mul_iwasawa_q3.json") +
                       " --format json --out " + out);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    Json j = Json::parse(slurp(out));
    EXPECT_EQ(j.at("task"), "mul");
    EXPECT_EQ(j.at("algebra"), "iwasawa");
    std::remove(out.c_str());

    RunOut r2 = run_cli("mul --config " + config_path("mul_iwasawa_q3.json") +
                        " --format xml");
    EXPECT_NE(r2.code, 0);
}

TEST(CliBinary, ByteIdenticalAcrossProcessRuns)
{
    std::string cmd = "bch --config " + config_path("bch_semidirect_q2.json");
    RunOut a = run_cli(cmd);
    RunOut b = run_cli(cmd + " --threads 3");
    EXPECT_EQ(a.code, 0);
    EXPECT_FALSE(a.out.empty());
    EXPECT_EQ(a.out, b.out);
}

}  // namespace
