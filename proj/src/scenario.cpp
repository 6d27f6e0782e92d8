#include "writeleak/scenario.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <sstream>

#include "writeleak/errors.hpp"

namespace writeleak {

namespace {

std::size_t round_up(std::size_t v, std::size_t to) {
    return (v + to - 1) / to * to;
}

std::vector<std::uint8_t> parse_hex_bytes(const std::string& hex) {
    std::string clean;
    for (char c : hex)
        if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
    if (clean.size() % 2 != 0)
        throw ConfigError("key hex must have an even number of digits");
    std::vector<std::uint8_t> out(clean.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto nib = [&](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return 10 + c - 'a';
            if (c >= 'A' && c <= 'F') return 10 + c - 'A';
            throw ConfigError("bad hex digit in key");
        };
        out[i] = static_cast<std::uint8_t>(nib(clean[2 * i]) * 16 + nib(clean[2 * i + 1]));
    }
    return out;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (victim != "ladder" && victim != "square_multiply" &&
        victim != "gauss_jordan")
        throw ConfigError("unknown victim: " + victim);
    if (cache_policy != "write_through" && cache_policy != "write_back")
        throw ConfigError("unknown cache policy: " + cache_policy);
    if (key_bits == 0 || modulus_bits == 0 || message_bytes == 0 ||
        memory_size == 0 || matrix_n == 0 || cache_sets == 0 || cache_ways == 0)
        throw ConfigError("all sizes must be positive");
    if (key_bits > modulus_bits)
        throw ConfigError("key_bits must not exceed modulus_bits");
    if (message_bytes * 8 < modulus_bits)
        throw ConfigError("message_bytes too small for modulus_bits");
    if (memory_size % page_size != 0 || page_size % line_size != 0)
        throw ConfigError("memory/page/line sizes must nest evenly");
    if (block_size < page_size || block_size % page_size != 0 ||
        memory_size % block_size != 0)
        throw ConfigError("block_size must tile memory in whole pages");
    if (oversampling < 1) throw ConfigError("oversampling must be >= 1");
    const std::size_t region = round_up(message_bytes, line_size);
    if (3 * region + 2 * line_size > page_size)
        throw ConfigError("operand regions do not fit in one page");
    if (key_hex && parse_hex_bytes(*key_hex).size() * 8 != key_bits)
        throw ConfigError("planted key length does not match key_bits");
}

std::string ScenarioConfig::to_kv() const {
    std::ostringstream os;
    os << "seed=" << seed << "\n"
       << "victim=" << victim << "\n"
       << "key_bits=" << key_bits << "\n"
       << "modulus_bits=" << modulus_bits << "\n"
       << "message_bytes=" << message_bytes << "\n"
       << "memory_size=" << memory_size << "\n"
       << "page_size=" << page_size << "\n"
       << "line_size=" << line_size << "\n"
       << "block_size=" << block_size << "\n"
       << "oversampling=" << oversampling << "\n"
       << "cache_sets=" << cache_sets << "\n"
       << "cache_ways=" << cache_ways << "\n"
       << "cache_policy=" << cache_policy << "\n"
       << "matrix_n=" << matrix_n << "\n"
       << "paper_example=" << (paper_example ? 1 : 0) << "\n"
       << "decoys=" << decoys << "\n"
       << "scratch_in_page=" << (scratch_in_page ? 1 : 0) << "\n";
    if (key_hex) os << "key=" << *key_hex << "\n";
    return os.str();
}

ScenarioConfig ScenarioConfig::from_kv(std::istream& in) {
    ScenarioConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line missing '=': " + line);
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        try {
            if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "victim") cfg.victim = val;
            else if (key == "key_bits") cfg.key_bits = std::stoull(val);
            else if (key == "modulus_bits") cfg.modulus_bits = std::stoull(val);
            else if (key == "message_bytes") cfg.message_bytes = std::stoull(val);
            else if (key == "memory_size") cfg.memory_size = std::stoull(val);
            else if (key == "page_size") cfg.page_size = std::stoull(val);
            else if (key == "line_size") cfg.line_size = std::stoull(val);
            else if (key == "block_size") cfg.block_size = std::stoull(val);
            else if (key == "oversampling") cfg.oversampling = std::stoi(val);
            else if (key == "cache_sets") cfg.cache_sets = std::stoull(val);
            else if (key == "cache_ways") cfg.cache_ways = std::stoull(val);
            else if (key == "cache_policy") cfg.cache_policy = val;
            else if (key == "matrix_n") cfg.matrix_n = std::stoull(val);
            else if (key == "paper_example") cfg.paper_example = val != "0";
            else if (key == "decoys") cfg.decoys = std::stoi(val);
            else if (key == "scratch_in_page") cfg.scratch_in_page = val != "0";
            else if (key == "key") cfg.key_hex = val;
            else throw ConfigError("unknown config key: " + key);
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad value for " + key + ": " + val);
        } catch (const std::out_of_range&) {
            throw ConfigError("value out of range for " + key + ": " + val);
        }
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::from_kv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    return from_kv(f);
}

ExpScenario::ExpScenario(const ScenarioConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.victim == "gauss_jordan")
        throw ConfigError("ExpScenario: not an exponentiation victim");
    mem_ = std::make_unique<SimMemory>(cfg_.memory_size, cfg_.page_size,
                                       cfg_.line_size);
    cache_ = std::make_unique<CacheModel>(
        cfg_.cache_sets, cfg_.cache_ways, cfg_.line_size,
        cfg_.cache_policy == "write_through" ? WritePolicy::write_through
                                             : WritePolicy::write_back);
    bus_ = std::make_unique<MemoryBus>(MemoryBus{*mem_, *cache_, nullptr, {}});

    std::mt19937_64 rng(cfg_.seed);
    const std::size_t pages = cfg_.memory_size / cfg_.page_size;
    page_ = (rng() % pages) * cfg_.page_size;

    BigNat n = BigNat::random_with_top_bit(cfg_.modulus_bits, rng);
    if (!n.is_odd()) n = n.add(BigNat(1));

    KeyBits key = cfg_.key_hex
                      ? KeyBits::from_bytes_be(parse_hex_bytes(*cfg_.key_hex))
                      : KeyBits::random(cfg_.key_bits, rng);

    auto layout =
        OperandLayout::at_page(page_, cfg_.message_bytes, cfg_.line_size);
    layout.validate((cfg_.modulus_bits + 7) / 8, cfg_.line_size);

    const auto kind = cfg_.victim == "ladder"
                          ? ContinuousVictim::Kind::ladder
                          : ContinuousVictim::Kind::square_multiply;
    victim_ = std::make_unique<ContinuousVictim>(kind, std::move(key), std::move(n),
                                                 layout, rng());
    if (cfg_.scratch_in_page) {
        const std::uint64_t scratch =
            layout.r1.base + layout.r1.len + cfg_.line_size;
        victim_->set_scratch(scratch, 16, 64);
    }
    victim_->current().prepare(*bus_);

    for (int i = 0; i < cfg_.decoys; ++i) {
        std::uint64_t dp;
        do {
            dp = (rng() % pages) * cfg_.page_size;
        } while (dp == page_);
        decoys_.emplace_back(dp, 3, cfg_.line_size);
    }
}

void ExpScenario::set_trace(TraceLog* t) {
    trace_ = t;
    bus_->trace = t;
}

RegionPattern ExpScenario::pattern() const {
    return {cfg_.line_size,
            (cfg_.message_bytes + cfg_.line_size - 1) / cfg_.line_size, 0};
}

bool ExpScenario::advance_event() {
    if (!victim_->step_within(*bus_)) {
        victim_->restart(*bus_);
        victim_->step_within(*bus_);
    }
    for (auto& d : decoys_) d.on_event(*mem_);
    return true;
}

void ExpScenario::begin_fresh_encryption() {
    victim_->run_current_to_end(*bus_);
    victim_->restart(*bus_);
}

bool ExpScenario::step_current() {
    if (!victim_->step_within(*bus_)) return false;
    for (auto& d : decoys_) d.on_event(*mem_);
    return true;
}

AttackReport run_exp_attack(const ScenarioConfig& cfg, TraceLog* trace) {
    ExpScenario sc(cfg);
    AttackReport rep;
    rep.planted_page = sc.planted_page();
    rep.bits_total = cfg.key_bits;
    if (cfg.key_bits % 8 == 0) rep.planted_hex = sc.planted_key().hex_lines();

    try {
        // Phase 1: address-space identification (Alg. 3 refinement). Three
        // victim events always span at least one complete key-bit iteration,
        // so both operand regions change between the paired snapshots.
        // A scan window can land on the no-op rewrites of leading zero key
        // bits and lose the victim block, so a failed round is retried.
        const std::uint64_t clock0 = sc.mem().event_clock;
        IdentifyResult id;
        for (int attempt = 0;; ++attempt) {
            try {
                id = identify_address_space(
                    sc.mem(),
                    [&] { for (int i = 0; i < 3; ++i) sc.advance_event(); },
                    sc.pattern(), cfg.block_size);
                break;
            } catch (const IdentifyError&) {
                if (attempt == 4) throw;
            }
        }
        rep.victim_page = id.page_addr;
        rep.identify.snapshots = id.stats.snapshots;
        rep.identify.bytes = id.stats.bytes_scanned;
        rep.identify.rounds = id.stats.rounds;
        rep.identify.events = sc.mem().event_clock - clock0;

        // Phase 2+3: capture one full encryption, split the page into the
        // two operand clusters, decode the update order.
        sc.begin_fresh_encryption();
        sc.set_trace(trace);
        SnapshotBudget budget;
        budget.oversampling = cfg.oversampling;
        auto cap = run_interleaved([&] { return sc.step_current(); }, sc.mem(),
                                   id.page_addr, cfg.page_size, budget, trace);
        sc.set_trace(nullptr);
        rep.capture.snapshots = cap.snapshots.size();
        rep.capture.bytes = cap.bytes_transferred;
        rep.capture.events = cap.events;

        const auto th = compute_threshold(cap.snapshots);
        const auto v = remove_unchanged(cap.snapshots);
        std::vector<Operand> w;
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            w.push_back(correlate(v[i], v[i + 1], th));
        const KeyBits recovered = infer_key(w, cfg.key_bits);

        rep.bits_correct = 0;
        for (std::size_t j = 0; j < cfg.key_bits; ++j)
            if (recovered.bit(j) == sc.planted_key().bit(j)) ++rep.bits_correct;
        if (cfg.key_bits % 8 == 0) rep.recovered_hex = recovered.hex_lines();
        rep.success = recovered == sc.planted_key() &&
                      id.page_addr == sc.planted_page();
        if (!rep.success) rep.error = "recovered key does not match";
    } catch (const IdentifyError& e) {
        rep.error = e.what();
    } catch (const ThresholdError& e) {
        rep.error = e.what();
    } catch (const AmbiguousUpdate& e) {
        rep.error = e.what();
    } catch (const DecodeError& e) {
        rep.error = e.what();
    } catch (const std::length_error& e) {
        rep.error = e.what();
    }
    return rep;
}

AttackReport run_gf2_attack(const ScenarioConfig& cfg) {
    cfg.validate();
    AttackReport rep;
    std::mt19937_64 rng(cfg.seed);
    const BitMatrix s = cfg.paper_example
                            ? worked_example_matrix()
                            : BitMatrix::random_swap_free(cfg.matrix_n, rng);
    rep.planted_grid = s.to_grid();
    rep.bits_total = s.n() * s.n();
    try {
        const auto demo = mceliece_decrypt_leak_demo(s);
        rep.recovered_grid = demo.recovered.to_grid();
        rep.bits_correct = 0;
        for (std::size_t r = 0; r < s.n(); ++r)
            for (std::size_t c = 0; c < s.n(); ++c)
                if (demo.recovered.at(r, c) == s.at(r, c)) ++rep.bits_correct;
        rep.success = demo.recovered == s && demo.modes_agree;
        if (!demo.modes_agree) rep.error = "observer modes disagree";
        else if (!rep.success) rep.error = "recovered matrix does not match";
    } catch (const SwapRequired& e) {
        rep.error = e.what();
    } catch (const SingularMatrix& e) {
        rep.error = e.what();
    } catch (const TraceError& e) {
        rep.error = e.what();
    }
    return rep;
}

AttackReport run_attack(const ScenarioConfig& cfg) {
    return cfg.victim == "gauss_jordan" ? run_gf2_attack(cfg)
                                        : run_exp_attack(cfg);
}

std::string capture_histogram_csv(const ScenarioConfig& cfg) {
    ExpScenario sc(cfg);
    sc.begin_fresh_encryption();
    SnapshotBudget budget;
    budget.oversampling = cfg.oversampling;
    auto cap = run_interleaved([&] { return sc.step_current(); }, sc.mem(),
                               sc.planted_page(), cfg.page_size, budget);
    return build_histogram(cap.snapshots).to_csv();
}

std::string capture_trace_jsonl(const ScenarioConfig& cfg) {
    TraceLog trace;
    ExpScenario sc(cfg);
    sc.begin_fresh_encryption();
    sc.set_trace(&trace);
    SnapshotBudget budget;
    budget.oversampling = cfg.oversampling;
    run_interleaved([&] { return sc.step_current(); }, sc.mem(),
                    sc.planted_page(), cfg.page_size, budget, &trace);
    return trace.text();
}

namespace {
std::string hex_addr(std::uint64_t a) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%08llx", static_cast<unsigned long long>(a));
    return buf;
}
}  // namespace

std::string AttackReport::to_text() const {
    std::ostringstream os;
    os << "status        : " << (success ? "success" : "failed") << "\n";
    if (!error.empty()) os << "error         : " << error << "\n";
    if (!planted_grid.empty()) {
        os << "matrix bits   : " << bits_correct << "/" << bits_total
           << " correct\n";
        os << "Recovered matrix:\n" << recovered_grid;
        return os.str();
    }
    os << "victim page   : " << hex_addr(victim_page) << " (planted "
       << hex_addr(planted_page) << ")\n";
    os << "identify phase: rounds=" << identify.rounds
       << " snapshots=" << identify.snapshots << " bytes=" << identify.bytes
       << " events=" << identify.events << "\n";
    os << "capture phase : snapshots=" << capture.snapshots
       << " bytes=" << capture.bytes << " events=" << capture.events << "\n";
    os << "key bits      : " << bits_correct << "/" << bits_total << " correct\n";
    if (!recovered_hex.empty())
        os << "Inferred Key is:\n" << recovered_hex;
    return os.str();
}

std::string AttackReport::to_json() const {
    nlohmann::ordered_json j;
    j["success"] = success;
    j["error"] = error;
    if (!planted_grid.empty()) {
        j["planted_grid"] = planted_grid;
        j["recovered_grid"] = recovered_grid;
    } else {
        j["victim_page"] = hex_addr(victim_page);
        j["planted_page"] = hex_addr(planted_page);
        j["identify"] = {{"rounds", identify.rounds},
                         {"snapshots", identify.snapshots},
                         {"bytes", identify.bytes},
                         {"events", identify.events}};
        j["capture"] = {{"snapshots", capture.snapshots},
                        {"bytes", capture.bytes},
                        {"events", capture.events}};
        j["recovered_key"] = recovered_hex;
    }
    j["bits_total"] = bits_total;
    j["bits_correct"] = bits_correct;
    return j.dump(2) + "\n";
}

}  // namespace writeleak
