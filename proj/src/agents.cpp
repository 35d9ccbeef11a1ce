#include "rema/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "rema/errors.hpp"
#include "rema/text.hpp"

namespace rema {

namespace {

// Largest table we are willing to allocate (entries).
constexpr std::size_t kMaxTableEntries = std::size_t{1} << 28;

std::size_t checked_pow(std::size_t base, int exp, const char* what) {
    std::size_t out = 1;
    for (int i = 0; i < exp; ++i) {
        if (out > kMaxTableEntries / base) throw ConfigError(std::string(what) + " space too large");
        out *= base;
    }
    return out;
}

}  // namespace

std::string_view to_string(Variant v) {
    return v == Variant::base ? "base" : "memory";
}

Variant parse_variant(std::string_view s) {
    if (s == "base") return Variant::base;
    if (s == "memory") return Variant::memory;
    throw std::invalid_argument("unknown variant '" + std::string(s) + "'");
}

void RewardParams::validate() const {
    for (double v : {penalty_same, penalty_swap, penalty_no_detect, bonus_detect, penalty_overstay})
        if (!std::isfinite(v)) throw ConfigError("reward terms must be finite");
    // alpha = 0 is accepted: it freezes the table, which is useful as a control run.
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (x_cap < 1) throw ConfigError("x_cap must be at least 1");
}

AgentState initial_state(const ScenarioConfig& cfg) {
    AgentState s;
    for (int r = 0; r < cfg.n_receivers; ++r) s.positions.push_back(r % cfg.n_bands);
    s.last_detections.assign(static_cast<std::size_t>(cfg.n_receivers), 0);
    s.streaks.assign(static_cast<std::size_t>(cfg.n_receivers), 0);
    return s;
}

// ---------------------------------------------------------------------------
// state and action indexing

StateSpace::StateSpace(const ScenarioConfig& cfg, Variant variant, int x_cap)
    : n_bands_(cfg.n_bands), n_receivers_(cfg.n_receivers), variant_(variant), x_cap_(x_cap) {
    if (x_cap < 1) throw ConfigError("x_cap must be at least 1");
    size_ = checked_pow(static_cast<std::size_t>(n_bands_), n_receivers_, "state");
    size_ *= checked_pow(2, n_receivers_, "state");
    if (variant_ == Variant::memory) size_ *= checked_pow(static_cast<std::size_t>(x_cap_ + 1), n_receivers_, "state");
    if (size_ > kMaxTableEntries) throw ConfigError("state space too large");
}

std::size_t StateSpace::encode(const AgentState& s) const {
    const auto R = static_cast<std::size_t>(n_receivers_);
    if (s.positions.size() != R || s.last_detections.size() != R)
        throw std::invalid_argument("agent state has wrong receiver count");
    std::size_t index = 0;
    for (Band p : s.positions) {
        if (p < 0 || p >= n_bands_) throw std::out_of_range("receiver position out of range");
        index = index * static_cast<std::size_t>(n_bands_) + static_cast<std::size_t>(p);
    }
    for (auto d : s.last_detections) index = index * 2 + (d ? 1 : 0);
    if (variant_ == Variant::memory) {
        if (s.streaks.size() != R) throw std::invalid_argument("agent state has wrong streak count");
        for (int m : s.streaks) {
            if (m < 0 || m > x_cap_) throw std::out_of_range("streak outside [0, x_cap]");
            index = index * static_cast<std::size_t>(x_cap_ + 1) + static_cast<std::size_t>(m);
        }
    }
    return index;
}

AgentState StateSpace::decode(std::size_t index) const {
    if (index >= size_)
        throw std::out_of_range("state index " + std::to_string(index) + " outside [0, " + std::to_string(size_) + ")");
    const auto R = static_cast<std::size_t>(n_receivers_);
    AgentState s;
    s.positions.resize(R);
    s.last_detections.resize(R);
    s.streaks.assign(R, 0);
    if (variant_ == Variant::memory) {
        const auto radix = static_cast<std::size_t>(x_cap_ + 1);
        for (std::size_t r = R; r-- > 0;) {
            s.streaks[r] = static_cast<int>(index % radix);
            index /= radix;
        }
    }
    for (std::size_t r = R; r-- > 0;) {
        s.last_detections[r] = static_cast<std::uint8_t>(index % 2);
        index /= 2;
    }
    for (std::size_t r = R; r-- > 0;) {
        s.positions[r] = static_cast<Band>(index % static_cast<std::size_t>(n_bands_));
        index /= static_cast<std::size_t>(n_bands_);
    }
    return s;
}

std::size_t encode_state(const AgentState& state, const ScenarioConfig& cfg, Variant variant, int x_cap) {
    return StateSpace(cfg, variant, x_cap).encode(state);
}

AgentState decode_state(std::size_t index, const ScenarioConfig& cfg, Variant variant, int x_cap) {
    return StateSpace(cfg, variant, x_cap).decode(index);
}

std::size_t action_count(const ScenarioConfig& cfg) {
    return checked_pow(static_cast<std::size_t>(cfg.n_bands), cfg.n_receivers, "action");
}

std::size_t encode_action(const Action& action, const ScenarioConfig& cfg) {
    std::size_t index = 0;
    for (Band p : action.positions) {
        if (p < 0 || p >= cfg.n_bands) throw std::out_of_range("action position out of range");
        index = index * static_cast<std::size_t>(cfg.n_bands) + static_cast<std::size_t>(p);
    }
    return index;
}

Action decode_action(std::size_t index, const ScenarioConfig& cfg) {
    const auto nb = static_cast<std::size_t>(cfg.n_bands);
    Action a;
    a.positions.resize(static_cast<std::size_t>(cfg.n_receivers));
    for (std::size_t r = a.positions.size(); r-- > 0;) {
        a.positions[r] = static_cast<Band>(index % nb);
        index /= nb;
    }
    if (index != 0) throw std::out_of_range("action index out of range");
    return a;
}

// ---------------------------------------------------------------------------
// policies

Action heuristic_action(int step, const ScenarioConfig& cfg) {
    const int R = cfg.n_receivers;
    const int period = (cfg.n_bands + R - 1) / R;
    const int k = step % period;
    Action a;
    a.positions.reserve(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) a.positions.push_back((k * R + r) % cfg.n_bands);
    return a;
}

QTable::QTable(Variant variant, std::size_t n_states, std::size_t n_actions, std::uint64_t init_seed)
    : variant_(variant), n_states_(n_states), n_actions_(n_actions), init_seed_(init_seed),
      values_(n_states * n_actions, 0.0) {}

std::span<double> QTable::row(std::size_t state) {
    if (state >= n_states_) throw std::out_of_range("state index out of range");
    return std::span<double>(values_).subspan(state * n_actions_, n_actions_);
}

std::span<const double> QTable::row(std::size_t state) const {
    if (state >= n_states_) throw std::out_of_range("state index out of range");
    return std::span<const double>(values_).subspan(state * n_actions_, n_actions_);
}

bool QTable::same_values(const QTable& other) const {
    return variant_ == other.variant_ && n_states_ == other.n_states_ && n_actions_ == other.n_actions_ &&
           values_ == other.values_;
}

QTable init_qtable(const ScenarioConfig& cfg, Variant variant, std::uint64_t init_seed, int x_cap) {
    const StateSpace space(cfg, variant, x_cap);
    const std::size_t n_actions = action_count(cfg);
    if (space.size() > kMaxTableEntries / n_actions) throw ConfigError("Q-table too large");
    QTable table(variant, space.size(), n_actions, init_seed);
    Rng rng(init_seed);
    for (std::size_t s = 0; s < table.n_states(); ++s)
        for (double& v : table.row(s)) v = rng.uniform01();
    return table;
}

std::size_t greedy_action(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < row.size(); ++a)
        if (row[a] > row[best]) best = a;
    return best;
}

std::size_t select_action(const QTable& table, std::size_t state, double epsilon, Rng& rng) {
    const auto row = table.row(state);
    if (rng.uniform01() < epsilon) return rng.uniform_int(table.n_actions());
    return greedy_action(row);
}

std::vector<int> update_streaks(const AgentState& prev, const Action& action, const Feedback& feedback) {
    const std::size_t R = action.positions.size();
    std::vector<int> out(R, 0);
    for (std::size_t r = 0; r < R; ++r) {
        if (!feedback.detections[r]) continue;
        const int before = r < prev.streaks.size() ? prev.streaks[r] : 0;
        out[r] = action.positions[r] == prev.positions[r] ? before + 1 : 1;
    }
    return out;
}

double compute_reward(const AgentState& prev, const Action& action, const Feedback& feedback,
                      std::span<const int> streaks_after, const RewardParams& p, Variant variant) {
    const auto& pos = action.positions;
    const bool all_same = std::adjacent_find(pos.begin(), pos.end(), std::not_equal_to<>()) == pos.end();

    double reward = 0.0;
    if (pos.size() >= 2 && all_same) reward += p.penalty_same;
    if (pos.size() >= 2 && !all_same && std::equal(pos.begin(), pos.end(), prev.positions.rbegin(), prev.positions.rend()))
        reward += p.penalty_swap;
    if (!feedback.any()) reward += p.penalty_no_detect;
    for (std::size_t r = 0; r < pos.size(); ++r) {
        if (!feedback.detections[r]) continue;
        reward += p.bonus_detect * std::min(streaks_after[r], p.x_cap);
        if (variant == Variant::memory && streaks_after[r] > p.x_cap) reward += p.penalty_overstay;
    }
    return reward;
}

double q_update(QTable& table, std::size_t state, std::size_t action, double reward, std::size_t next_state,
                const RewardParams& p) {
    const auto next = table.row(next_state);
    const double best_next = *std::max_element(next.begin(), next.end());
    double& q = table.row(state)[action];
    q += p.alpha * (reward + p.gamma * best_next - q);
    return q;
}

// ---------------------------------------------------------------------------
// persistence

namespace {
constexpr std::string_view kQMagic = "#REMA-QTABLE v1";
}

void write_qtable(std::ostream& out, const QTable& table) {
    out << kQMagic << '\n'
        << "variant " << to_string(table.variant()) << '\n'
        << "states " << table.n_states() << " actions " << table.n_actions() << '\n';
    std::string line;
    for (std::size_t s = 0; s < table.n_states(); ++s) {
        line.clear();
        const auto row = table.row(s);
        for (std::size_t a = 0; a < row.size(); ++a) {
            if (a) line += ' ';
            line += text::sig17(row[a]);
        }
        out << line << '\n';
    }
}

QTable read_qtable(std::istream& in) {
    std::size_t line_no = 0;
    std::string line;
    auto next = [&](const char* expecting) -> std::string& {
        if (!std::getline(in, line)) throw ParseError(line_no + 1, std::string("unexpected end of file, expected ") + expecting);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next("header") != kQMagic) throw ParseError(line_no, "expected '" + std::string(kQMagic) + "'");

    const auto vt = text::split_ws(next("variant line"));
    if (vt.size() != 2 || vt[0] != "variant") throw ParseError(line_no, "expected 'variant base|memory'");
    Variant variant{};
    try {
        variant = parse_variant(vt[1]);
    } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, e.what());
    }

    const auto dims = text::split_ws(next("dimensions line"));
    if (dims.size() != 4 || dims[0] != "states" || dims[2] != "actions")
        throw ParseError(line_no, "expected 'states <int> actions <int>'");
    const auto n_states = text::parse_u64(dims[1]);
    const auto n_actions = text::parse_u64(dims[3]);
    if (!n_states || !n_actions || *n_states == 0 || *n_actions == 0 || *n_states > kMaxTableEntries / *n_actions)
        throw ParseError(line_no, "bad table dimensions");

    QTable table(variant, *n_states, *n_actions);
    for (std::size_t s = 0; s < *n_states; ++s) {
        const auto cells = text::split_ws(next("table row"));
        if (cells.size() != *n_actions)
            throw ParseError(line_no, "row has " + std::to_string(cells.size()) + " values, expected " + std::to_string(*n_actions));
        auto row = table.row(s);
        for (std::size_t a = 0; a < cells.size(); ++a) {
            const auto v = text::parse_double(cells[a]);
            if (!v || !std::isfinite(*v)) throw ParseError(line_no, "bad value '" + std::string(cells[a]) + "'");
            row[a] = *v;
        }
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line != "\r") throw ParseError(line_no + 1, "unexpected content after last row");
    }
    return table;
}

void save_qtable(const QTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_qtable(out, table);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

QTable load_qtable(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_qtable(in);
}

std::string qtable_checksum(const QTable& table) {
    std::ostringstream buf;
    write_qtable(buf, table);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : buf.str()) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    return out;
}

}  // namespace rema
