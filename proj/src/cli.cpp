#include "relsteg/cli.hpp"

#include "relsteg/closed_form.hpp"
#include "relsteg/errors.hpp"
#include "relsteg/oracle.hpp"
#include "relsteg/simulator.hpp"
#include "relsteg/stego_codec.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace relsteg {

using ordered_json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kConfigKeys = {"p0", "p1", "init0", "gamma", "b",
                                              "b_min", "b_max", "steps", "seed", "output"};

double number_field(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw UsageError(std::string("config: '") + key + "' must be a number");
    return v.get<double>();
}

// Rounded to 12 significant digits so JSON output matches the CSV text.
ordered_json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::stod(format_number(v));
}

std::string dump(const ordered_json& j) {
    return j.dump(2) + "\n";
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open '" + path + "' for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw UsageError("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::uint32_t crc32_of(const BitStream& bits) {
    const auto& bytes = bits.bytes();
    return static_cast<std::uint32_t>(
        ::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

void push_u32(BitStream& bits, std::uint32_t v) {
    for (int i = 31; i >= 0; --i) bits.push_back((v >> i) & 1u);
}

std::uint32_t read_u32(const BitStream& bits, std::size_t offset) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 32; ++i) v = (v << 1) | (bits[offset + i] ? 1u : 0u);
    return v;
}

BitStream framed(const std::vector<std::uint8_t>& payload, std::size_t bit_count) {
    if (bit_count > 0xFFFFFFFFull) throw UsageError("message too long for the 32-bit header");
    const BitStream body = BitStream::from_bytes(payload, bit_count);
    BitStream out;
    push_u32(out, static_cast<std::uint32_t>(bit_count));
    push_u32(out, crc32_of(body));
    for (std::size_t i = 0; i < body.size(); ++i) out.push_back(body[i]);
    return out;
}

ordered_json solution_json(const RunConfig& cfg, double b, const PolicySolution& sol) {
    const CanonicalForm form = canonicalize(cfg.params());
    ordered_json j;
    j["p0"] = num(cfg.p0);
    j["p1"] = num(cfg.p1);
    j["init0"] = num(cfg.init0);
    j["gamma"] = num(cfg.gamma);
    j["b"] = num(b);
    j["shape"] = std::string(to_string(form.shape));
    j["swapped"] = form.swapped;
    j["a0"] = num(sol.policy.a0);
    j["a1"] = num(sol.policy.a1);
    j["d0"] = num(sol.occupancy.d0);
    j["d1"] = num(sol.occupancy.d1);
    j["regime"] = std::string(to_string(sol.regime));
    j["b_low"] = num(sol.thresholds.b_low);
    j["b_high"] = num(sol.thresholds.b_high);
    j["reward_bits"] = num(sol.reward);
    j["cost"] = num(sol.cost);
    j["method"] = std::string(to_string(sol.method));
    return j;
}

ordered_json report_json(const EstimateReport& r, double analytic) {
    ordered_json j;
    j["mean"] = num(r.mean);
    j["std_error"] = num(r.std_error);
    j["analytic"] = num(analytic);
    j["z_score"] = num(r.std_error > 0 ? (r.mean - analytic) / r.std_error : 0.0);
    return j;
}

std::string output_path(const RunConfig& cfg, const std::string& flag) {
    if (!flag.empty()) return flag;
    return cfg.output.value_or("");
}

} // namespace

// ---------------------------------------------------------------------------
// Config

ChainParams RunConfig::params() const {
    try {
        return ChainParams(p0, p1, init0, gamma);
    } catch (const DomainError& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
}

double RunConfig::budget() const {
    if (!b) throw UsageError("config: 'b' is required for this command");
    return *b;
}

RunConfig parse_config(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config: expected a JSON object");
    for (const auto& item : j.items()) {
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), item.key()) == kConfigKeys.end()) {
            throw UsageError("config: unknown key '" + item.key() + "'");
        }
    }
    for (const char* key : {"p0", "p1", "init0", "gamma"}) {
        if (!j.contains(key)) throw UsageError(std::string("config: missing '") + key + "'");
    }
    RunConfig cfg;
    cfg.p0 = number_field(j, "p0");
    cfg.p1 = number_field(j, "p1");
    cfg.init0 = number_field(j, "init0");
    cfg.gamma = number_field(j, "gamma");
    if (j.contains("b")) cfg.b = number_field(j, "b");
    if (j.contains("b_min")) cfg.b_min = number_field(j, "b_min");
    if (j.contains("b_max")) cfg.b_max = number_field(j, "b_max");
    if (j.contains("steps")) {
        if (!j["steps"].is_number_integer()) throw UsageError("config: 'steps' must be an integer");
        cfg.steps = j["steps"].get<int>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) {
            throw UsageError("config: 'seed' must be a nonnegative integer");
        }
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output")) {
        if (!j["output"].is_string()) throw UsageError("config: 'output' must be a string");
        cfg.output = j["output"].get<std::string>();
    }

    cfg.params();
    if (cfg.b && !(*cfg.b >= 0.0)) throw UsageError("config: 'b' must be >= 0");
    if (cfg.b_min && !(*cfg.b_min >= 0.0)) throw UsageError("config: 'b_min' must be >= 0");
    if (cfg.b_min && cfg.b_max && *cfg.b_max < *cfg.b_min) {
        throw UsageError("config: 'b_max' must be >= 'b_min'");
    }
    if (cfg.steps && *cfg.steps < 2) throw UsageError("config: 'steps' must be >= 2");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    return parse_config(read_file(path));
}

std::string format_number(double v) {
    if (v == 0.0) v = 0.0; // drop the sign of -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Commands

std::string cmd_solve(const RunConfig& cfg) {
    const double b = cfg.budget();
    return dump(solution_json(cfg, b, optimal_policy(cfg.params(), b)));
}

std::string cmd_sweep(const RunConfig& cfg) {
    if (!cfg.b_min || !cfg.b_max || !cfg.steps) {
        throw UsageError("sweep needs 'b_min', 'b_max' and 'steps' in the config");
    }
    const ChainParams params = cfg.params();
    const double lo = *cfg.b_min;
    const double hi = *cfg.b_max;
    const int steps = *cfg.steps;

    std::vector<double> budgets;
    for (int i = 0; i < steps; ++i) {
        budgets.push_back(i + 1 == steps ? hi : lo + (hi - lo) * i / (steps - 1));
    }
    const Thresholds th = optimal_policy(params, lo).thresholds;
    for (double t : {th.b_low, th.b_high}) {
        if (std::isfinite(t) && t >= lo && t <= hi) budgets.push_back(t);
    }
    std::sort(budgets.begin(), budgets.end());
    budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());

    std::string csv = "b,a0,a1,d0,d1,reward_bits,cost,regime\n";
    for (double b : budgets) {
        const PolicySolution s = optimal_policy(params, b);
        csv += format_number(b) + ',' + format_number(s.policy.a0) + ',' +
               format_number(s.policy.a1) + ',' + format_number(s.occupancy.d0) + ',' +
               format_number(s.occupancy.d1) + ',' + format_number(s.reward) + ',' +
               format_number(s.cost) + ',' + std::string(to_string(s.regime)) + '\n';
    }
    return csv;
}

std::string cmd_oracle(const RunConfig& cfg, double grid_step) {
    if (!(grid_step > 0.0 && grid_step <= 0.5)) throw UsageError("--grid-step must be in (0, 0.5]");
    const double b = cfg.budget();
    const ChainParams params = cfg.params();
    const GridResult g = grid_search(params, b, grid_step);
    const Occupancy occ = occupancy_of(g.policy, params);
    ordered_json j;
    j["b"] = num(b);
    j["grid_step"] = num(grid_step);
    j["a0"] = num(g.policy.a0);
    j["a1"] = num(g.policy.a1);
    j["d0"] = num(occ.d0);
    j["d1"] = num(occ.d1);
    j["reward_bits"] = num(g.reward);
    j["cost"] = num(g.cost);
    return dump(j);
}

VerifyOutcome cmd_verify(const RunConfig& cfg, std::optional<Policy> policy) {
    const double b = cfg.budget();
    const ChainParams params = cfg.params();
    const CanonicalForm form = canonicalize(params);
    const Policy original = policy ? *policy : optimal_policy(params, b).policy;

    ordered_json j;
    j["b"] = num(b);
    j["a0"] = num(original.a0);
    j["a1"] = num(original.a1);
    j["shape"] = std::string(to_string(form.shape));
    if (form.shape == Shape::sticky_mixed) {
        j["passed"] = false;
        j["diagnostic"] = "no KKT certificate is available for the STICKY_MIXED shape";
        return {false, dump(j)};
    }
    const KktReport r = kkt_verify(form.params, b, to_canonical(original, form));
    const KktMultipliers& m = r.multipliers;
    j["swapped"] = form.swapped;
    j["regime"] = std::string(to_string(r.regime));
    j["case"] = r.case_label;
    j["multipliers"] = ordered_json{
        {"lambda", num(m.lambda)}, {"alpha0", num(m.alpha0)}, {"alpha1", num(m.alpha1)},
        {"beta0", num(m.beta0)},   {"beta1", num(m.beta1)},   {"omega0", num(m.omega0)},
        {"omega1", num(m.omega1)}, {"nu0", num(m.nu0)},       {"nu1", num(m.nu1)},
        {"mu0", num(m.mu0)},       {"mu1", num(m.mu1)}};
    j["stationarity"] = ordered_json::array();
    for (double v : r.stationarity) j["stationarity"].push_back(num(v));
    j["complementary_slackness"] = ordered_json::array();
    for (double v : r.complementary) j["complementary_slackness"].push_back(num(v));
    j["budget_feasible"] = r.budget_feasible;
    j["box_feasible"] = r.box_feasible;
    j["dual_feasible"] = r.dual_feasible;
    j["passed"] = r.passed;
    j["diagnostic"] = r.diagnostic;
    return {r.passed, dump(j)};
}

std::string cmd_simulate(const RunConfig& cfg, std::size_t rollouts) {
    const double b = cfg.budget();
    const ChainParams params = cfg.params();
    const Policy policy = optimal_policy(params, b).policy;
    const EstimateSet est = estimate_all(params, policy, rollouts, cfg.seed);
    const Occupancy occ = occupancy_of(policy, params);

    ordered_json j;
    j["b"] = num(b);
    j["a0"] = num(policy.a0);
    j["a1"] = num(policy.a1);
    j["n_rollouts"] = rollouts;
    j["horizon"] = est.reward.horizon;
    j["seed"] = cfg.seed;
    j["reward_bits"] = report_json(est.reward, reward_of(policy, params));
    j["cost"] = report_json(est.cost, cost_of(policy, params));
    j["visitation0"] = report_json(est.visitation0, occ.d0);
    j["visitation1"] = report_json(est.visitation1, occ.d1);
    return dump(j);
}

std::vector<bool> frame_message(const std::vector<std::uint8_t>& payload, std::size_t bit_count) {
    const BitStream f = framed(payload, bit_count);
    std::vector<bool> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i];
    return out;
}

EmbedOutcome cmd_embed(const RunConfig& cfg, const std::vector<std::uint8_t>& message,
                       std::size_t bit_count, std::size_t n_tokens) {
    if (n_tokens == 0) throw UsageError("--n-tokens must be positive");
    if (bit_count > 8 * message.size()) throw UsageError("--message-bits exceeds the file size");
    const double b = cfg.budget();
    const ChainParams params = cfg.params();
    const Policy policy = optimal_policy(params, b).policy;
    const BitStream frame = framed(message, bit_count);
    const EmbedResult r =
        embed(frame, chain_provider(policy, chain_start_state(params)), n_tokens, cfg.seed);

    std::string tokens;
    tokens.reserve(2 * r.tokens.size());
    for (Token t : r.tokens) tokens += std::to_string(t) + '\n';

    const bool complete = r.consumed >= frame.size();
    ordered_json j;
    j["a0"] = num(policy.a0);
    j["a1"] = num(policy.a1);
    j["n_tokens"] = n_tokens;
    j["message_bits"] = bit_count;
    j["frame_bits"] = frame.size();
    j["consumed"] = r.consumed;
    j["tail_seed"] = r.tail_seed;
    j["complete"] = complete;
    j["entropy_rate_bits"] = num(entropy_rate(policy));
    return {tokens, dump(j), complete};
}

ExtractOutcome cmd_extract(const RunConfig& cfg, std::string_view token_text) {
    std::vector<Token> tokens;
    std::istringstream in{std::string(token_text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(line, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != line.size() || line[0] == '-' || v > 0xFFFFFFFFul) {
            throw DecodeError("token file line " + std::to_string(line_no) + ": '" + line +
                              "' is not a token id");
        }
        tokens.push_back(static_cast<Token>(v));
    }

    const double b = cfg.budget();
    const ChainParams params = cfg.params();
    const Policy policy = optimal_policy(params, b).policy;
    const BitStream bits = extract(tokens, chain_provider(policy, chain_start_state(params)));
    if (bits.size() < 64) {
        throw DecodeError("only " + std::to_string(bits.size()) +
                          " bits recovered, fewer than the 64-bit frame header");
    }
    const std::size_t length = read_u32(bits, 0);
    const std::uint32_t checksum = read_u32(bits, 32);
    if (bits.size() < 64 + length) {
        throw DecodeError("frame declares " + std::to_string(length) + " payload bits but only " +
                          std::to_string(bits.size() - 64) +
                          " were recovered (too few tokens, or a config mismatch)");
    }
    BitStream payload;
    for (std::size_t i = 0; i < length; ++i) payload.push_back(bits[64 + i]);
    const std::uint32_t actual = crc32_of(payload);
    if (actual != checksum) {
        throw DecodeError("checksum mismatch: the tokens were not produced with this config");
    }
    ordered_json j;
    j["n_tokens"] = tokens.size();
    j["recovered_bits"] = bits.size();
    j["message_bits"] = length;
    j["checksum_ok"] = true;
    return {payload.bytes(), length, dump(j)};
}

// ---------------------------------------------------------------------------
// Argument handling

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"relsteg: budgeted entropy policies for two-state chains"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::size_t n_tokens = 1000;
    std::string message_path;
    std::optional<std::size_t> message_bits;
    std::string tokens_path;
    std::string solution_path;
    double grid_step = 1e-3;
    std::size_t rollouts = 10000;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_path, "output file (overrides config 'output')");
        sub->add_option("--seed", seed, "RNG seed (overrides config 'seed')");
    };
    CLI::App* solve = app.add_subcommand("solve", "optimal policy for budget b");
    CLI::App* sweep = app.add_subcommand("sweep", "CSV of the optimal policy over a budget range");
    CLI::App* oracle = app.add_subcommand("oracle", "brute-force grid search");
    CLI::App* verify = app.add_subcommand("verify", "KKT certificate of the optimal policy");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo estimates of the policy");
    CLI::App* embed_cmd = app.add_subcommand("embed", "hide a message in a token sequence");
    CLI::App* extract_cmd = app.add_subcommand("extract", "recover a message from tokens");
    for (CLI::App* sub : {solve, sweep, oracle, verify, simulate, embed_cmd, extract_cmd}) {
        common(sub);
    }
    oracle->add_option("--grid-step", grid_step, "grid resolution")->capture_default_str();
    verify->add_option("--solution", solution_path, "solve record to check instead of re-solving");
    simulate->add_option("--rollouts", rollouts, "number of rollouts")->capture_default_str();
    embed_cmd->add_option("--message", message_path, "raw message bytes")->required();
    embed_cmd->add_option("--message-bits", message_bits, "payload bit count (default: 8 x size)");
    embed_cmd->add_option("--n-tokens", n_tokens, "tokens to emit")->capture_default_str();
    extract_cmd->add_option("--tokens", tokens_path, "token file, one id per line")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (seed) cfg.seed = *seed;
        const std::string path = output_path(cfg, out_path);
        auto emit = [&](const std::string& text) {
            out << text;
            if (!path.empty()) write_file(path, text);
        };

        if (solve->parsed()) {
            emit(cmd_solve(cfg));
        } else if (sweep->parsed()) {
            emit(cmd_sweep(cfg));
        } else if (oracle->parsed()) {
            emit(cmd_oracle(cfg, grid_step));
        } else if (verify->parsed()) {
            std::optional<Policy> policy;
            if (!solution_path.empty()) {
                const auto j = nlohmann::json::parse(read_file(solution_path));
                policy = Policy(j.at("a0").get<double>(), j.at("a1").get<double>());
            }
            const VerifyOutcome v = cmd_verify(cfg, policy);
            emit(v.report);
            return v.passed ? 0 : 1;
        } else if (simulate->parsed()) {
            if (rollouts < 100) throw UsageError("--rollouts must be at least 100");
            emit(cmd_simulate(cfg, rollouts));
        } else if (embed_cmd->parsed()) {
            const std::string raw = read_file(message_path);
            const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
            const EmbedOutcome r =
                cmd_embed(cfg, bytes, message_bits.value_or(8 * bytes.size()), n_tokens);
            if (path.empty()) {
                out << r.tokens;
                err << r.summary;
            } else {
                write_file(path, r.tokens);
                out << r.summary;
            }
            if (!r.complete) {
                err << "warning: " << n_tokens
                    << " tokens do not carry the whole message; increase --n-tokens\n";
                return 1;
            }
        } else if (extract_cmd->parsed()) {
            const ExtractOutcome r = cmd_extract(cfg, read_file(tokens_path));
            if (path.empty()) {
                out.write(reinterpret_cast<const char*>(r.message.data()),
                          static_cast<std::streamsize>(r.message.size()));
            } else {
                write_file(path, std::string(r.message.begin(), r.message.end()));
                out << r.summary;
            }
        }
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace relsteg
