/* Batch front door.  One subcommand per task plus an embedded selftest:
 *
 *   mixchar <task> --config job.json [--out PATH] [--format csv|json]
 *                  [-N n] [-D d] [--threads t]
 *   mixchar selftest [--json] [--inject-fault]
 *
 * Precision precedence: config file < environment (MIXCHAR_N, MIXCHAR_D) <
 * flags.  Exit codes: 0 success, 1 config error (including malformed JSON,
 * reported with line/column), 2 invariant-violation report. */

#include "mixchar/jobs.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using mixchar::config_error;
using mixchar::invariant_violation;

std::optional<long long> env_int(const char* name)
{
    const char* raw = std::getenv(name);
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    std::string s(raw);
    std::size_t k = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (k == s.size() || s.find_first_not_of("0123456789", k) != std::string::npos)
        throw config_error(std::string("environment override ") + name +
                           ": expected an integer, got '" + s + "'");
    return std::stoll(s);
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_artifact(const std::string& path, const std::string& data)
{
    if (path.empty()) {
        std::cout << data;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot open output file '" + path + "'");
    out << data;
    if (!out) throw config_error("cannot write output file '" + path + "'");
}

struct TaskOpts {
    std::string config;
    std::string out;
    std::string format;
    std::optional<long long> N, D;
    unsigned threads = 0;
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"truncated computations in mixed-characteristic binomial rings"};
    app.require_subcommand(1);

    const struct {
        const char* name;
        const char* desc;
    } tasks[] = {
        {"bch", "structure-constant table of a distribution algebra"},
        {"mul", "product of two truncated algebra elements"},
        {"mahler", "interpolation data -> binomial coefficient series"},
        {"classify", "windowed analyticity margins of a coefficient series"},
        {"cohomology", "group cohomology of a finitely generated module"},
        {"check-action", "local-analyticity check of a semilinear action"},
        {"lambda", "character values via binomial expansion"},
    };

    TaskOpts opt;
    for (const auto& t : tasks) {
        CLI::App* sub = app.add_subcommand(t.name, t.desc);
        sub->add_option("--config", opt.config, "job description (JSON)")->required();
        sub->add_option("--out", opt.out, "artifact path (default: config output.path or stdout)");
        sub->add_option("--format", opt.format, "artifact format")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("-N", opt.N, "override pi-adic precision");
        sub->add_option("-D", opt.D, "override support/degree cap");
        sub->add_option("--threads", opt.threads, "worker threads (0 = serial)");
    }

    bool st_json = false, st_fault = false;
    CLI::App* st = app.add_subcommand("selftest", "run the embedded invariant suite");
    st->add_flag("--json", st_json, "machine-readable pass/fail list");
    st->add_flag("--inject-fault", st_fault, "test-only: force one check to fail");

    CLI11_PARSE(app, argc, argv);
    CLI::App* chosen = app.get_subcommands().front();

    try {
        if (chosen == st) {
            mixchar::jobs::SelftestReport rep = mixchar::jobs::selftest(st_fault);
            std::cout << (st_json ? mixchar::jobs::selftest_json(rep)
                                  : mixchar::jobs::selftest_text(rep));
            return rep.all_pass() ? 0 : 2;
        }

        mixchar::jobs::JobConfig cfg = mixchar::jobs::parse_config(read_file(opt.config));
        if (cfg.task != chosen->get_name())
            throw config_error("task mismatch: config requests '" + cfg.task +
                               "' but subcommand is '" + chosen->get_name() + "'");
        /* file < environment < flags */
        mixchar::jobs::apply_precision_override(cfg, env_int("MIXCHAR_N"), env_int("MIXCHAR_D"));
        mixchar::jobs::apply_precision_override(cfg, opt.N, opt.D);
        if (!opt.format.empty()) cfg.format = opt.format;

        mixchar::jobs::JobResult res = mixchar::jobs::run(cfg, opt.threads);
        write_artifact(!opt.out.empty() ? opt.out : cfg.path, res.artifact);
        return res.exit_code;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const invariant_violation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
