// mlm: command-line front end for multilevel hierarchies and MCMT rules.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mlm/engine.hpp"
#include "mlm/hierarchy.hpp"
#include "mlm/matcher.hpp"
#include "mlm/mcmt.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("mlm");
    logger->set_pattern("%^%l%$: %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("MLM_LOG")) {
        const std::string v = env;
        if (v == "error") spdlog::set_level(spdlog::level::err);
        else if (v == "warn") spdlog::set_level(spdlog::level::warn);
        else if (v == "info") spdlog::set_level(spdlog::level::info);
        else if (v == "debug") spdlog::set_level(spdlog::level::debug);
        else spdlog::warn("ignoring MLM_LOG={}; expected error, warn, info or debug", v);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mlm::Error(mlm::ErrorKind::NotFound, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mlm::Error(mlm::ErrorKind::NotFound, "cannot write " + path);
    out << text;
}

void report_error(const mlm::Error& e, const std::string& file) {
    std::cerr << (file.empty() ? "" : file + ":") << mlm::to_string(e.kind()) << ": " << e.what() << "\n";
}

int cmd_validate(const std::string& path) {
    auto h = mlm::load_hierarchy(path);
    auto violations = mlm::validate_hierarchy(h);
    for (const auto& v : violations)
        std::cout << v.model << "." << v.element << ": " << mlm::to_string(v.rule) << ": " << v.message << "\n";
    std::cout << h.models().size() << " models, " << violations.size() << " violations\n";
    return violations.empty() ? kOk : kInvalid;
}

int cmd_rules_check(const std::string& path, const std::string& hierarchy) {
    mlm::Graph root = hierarchy.empty() ? mlm::canonical_root().graph : mlm::load_hierarchy(hierarchy).root().graph;
    mlm::RuleModule module;
    try {
        module = mlm::parse_rule_module(read_file(path), root);
    } catch (const mlm::Error& e) {
        if (e.kind() == mlm::ErrorKind::NotFound) throw;
        report_error(e, path);
        return kInvalid;
    }
    std::size_t count = 0;
    for (const auto& r : module.rules) {
        for (const auto& v : mlm::validate_rule(r, root)) {
            std::cout << r.name << "." << v.element << ": " << mlm::to_string(v.check) << ": " << v.message << "\n";
            ++count;
        }
    }
    std::cout << module.rules.size() << " rules, " << count << " violations\n";
    return count == 0 ? kOk : kInvalid;
}

struct Inputs {
    mlm::Hierarchy h;
    mlm::RuleModule module;
    std::string target;
};

Inputs load_inputs(const std::string& hier, const std::string& rules, const std::string& target) {
    Inputs in;
    in.h = mlm::load_hierarchy(hier);
    in.module = mlm::parse_rule_module(read_file(rules), in.h.root().graph);
    in.target = in.h.resolve(target).name;
    spdlog::info("target {} at level {}", in.h.path_of(in.target), in.h.model(in.target).level);
    return in;
}

int cmd_proliferate(const std::string& hier, const std::string& rules, const std::string& target,
                    const std::string& out) {
    auto in = load_inputs(hier, rules, target);
    auto p = mlm::proliferate_all(in.module.rules, in.h, in.target);
    for (const auto& b : p.breakdown) {
        std::cerr << "  " << b.rule << ": " << b.matches << " matches, " << b.rules << " rules\n";
        if (b.no_matches()) spdlog::info("{} has no matches and is not proliferated", b.rule);
    }
    std::cerr << in.module.rules.size() << " MCMT rules -> " << p.rules.size() << " two-level rules\n";
    if (!out.empty()) write_output(out, mlm::rules_to_json(in.h, p));
    return kOk;
}

int cmd_apply(const std::string& hier, const std::string& rules, const std::string& target, const std::string& rule,
              std::size_t which, const std::string& out) {
    auto in = load_inputs(hier, rules, target);
    auto p = mlm::proliferate_all(in.module.rules, in.h, in.target);
    bool known = false;
    std::size_t seen = 0;
    for (const auto& r : p.rules) {
        if (r.name != rule && r.source_rule != rule) continue;
        known = true;
        auto result = mlm::apply_two_level_rule(r, in.h);
        for (const auto& rej : result.rejected) spdlog::info("{}: match rejected: {}", r.name, rej.reason);
        for (const auto& s : result.successors) {
            if (++seen != which) continue;
            spdlog::info("applied {} ({} created, {} deleted)", r.name, s.created.size(), s.deleted.size());
            write_output(out, mlm::dump_hierarchy(in.h.with_model(s.model)));
            return kOk;
        }
    }
    if (!known) {
        std::cerr << "no rule named " << rule << "\n";
        return kUsage;
    }
    std::cerr << rule << " has " << seen << " applicable matches; --match " << which << " is out of range\n";
    return kInvalid;
}

int cmd_run(const std::string& hier, const std::string& rules, const std::string& target, std::size_t steps,
            std::uint64_t seed, const std::string& trace_path, const std::string& out) {
    auto in = load_inputs(hier, rules, target);
    std::ofstream trace;
    if (!trace_path.empty()) {
        trace.open(trace_path, std::ios::binary);
        if (!trace) throw mlm::Error(mlm::ErrorKind::NotFound, "cannot write " + trace_path);
    }
    auto result = mlm::run(in.module.rules, in.h, in.target, steps, seed,
                           [&](const mlm::Hierarchy&, const mlm::TraceStep& step) {
                               const std::string line = mlm::trace_line(step);
                               if (trace.is_open()) trace << line << "\n";
                               else std::cerr << line << "\n";
                           });
    spdlog::info("{} steps", result.steps.size());
    write_output(out, mlm::dump_hierarchy(result.final_state));
    return kOk;
}

int cmd_fmt(const std::string& path) {
    try {
        std::cout << mlm::print_module(mlm::parse_module_syntax(read_file(path)));
    } catch (const mlm::Error& e) {
        if (e.kind() == mlm::ErrorKind::NotFound) throw;
        report_error(e, path);
        return kUsage;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Multilevel model transformation with MCMT rules"};
    app.require_subcommand(1);

    std::string hier, rules, target, out, rule, trace, hierarchy_root;
    std::size_t which = 1, steps = 100;
    std::uint64_t seed = 0;

    auto* validate = app.add_subcommand("validate", "Validate a hierarchy");
    validate->add_option("hierarchy", hier, "Hierarchy JSON")->required();

    auto* rules_cmd = app.add_subcommand("rules", "Rule module commands");
    rules_cmd->require_subcommand(1);
    auto* check = rules_cmd->add_subcommand("check", "Parse and validate a rule module");
    check->add_option("rules", rules, "MCMT file")->required();
    check->add_option("--hierarchy", hierarchy_root, "Hierarchy whose root types the rules");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("hierarchy", hier, "Hierarchy JSON")->required();
        cmd->add_option("rules", rules, "MCMT file")->required();
        cmd->add_option("--target", target, "Target model (name or dotted path)")->required();
    };

    auto* prolif = app.add_subcommand("proliferate", "Generate two-level rules for a target model");
    add_common(prolif);
    prolif->add_option("-o,--output", out, "Write the rule set as JSON");

    auto* apply = app.add_subcommand("apply", "Apply one rule at one match");
    add_common(apply);
    apply->add_option("--rule", rule, "Two-level rule name, or an MCMT rule name")->required();
    apply->add_option("--match", which, "1-based index of the applicable match")->check(CLI::PositiveNumber);
    apply->add_option("-o,--output", out, "Write the resulting hierarchy here instead of stdout");

    auto* run = app.add_subcommand("run", "Execute rules with a seeded random scheduler");
    add_common(run);
    run->add_option("--steps", steps, "Maximum number of steps")->required();
    run->add_option("--seed", seed, "Scheduler seed")->required();
    run->add_option("--trace", trace, "Write the JSON-lines trace here instead of stderr");
    run->add_option("-o,--output", out, "Write the final hierarchy here instead of stdout");

    auto* fmt = app.add_subcommand("fmt", "Print a rule module in canonical form");
    fmt->add_option("rules", rules, "MCMT file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*validate) return cmd_validate(hier);
        if (*check) return cmd_rules_check(rules, hierarchy_root);
        if (*prolif) return cmd_proliferate(hier, rules, target, out);
        if (*apply) return cmd_apply(hier, rules, target, rule, which, out);
        if (*run) return cmd_run(hier, rules, target, steps, seed, trace, out);
        if (*fmt) return cmd_fmt(rules);
    } catch (const mlm::Error& e) {
        report_error(e, {});
        return kUsage;
    }
    return kUsage;
}
