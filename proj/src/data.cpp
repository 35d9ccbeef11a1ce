#include "rema/data.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rema/errors.hpp"
#include "rema/text.hpp"

namespace rema {

namespace {

constexpr std::string_view kMagic = "#REMA-DATASET v1";

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // the returned line stays valid until the next call
    const std::string& next(std::string_view expecting) {
        std::string& line = line_;
        if (!std::getline(in_, line)) throw ParseError(line_no_ + 1, "unexpected end of file, expected " + std::string(expecting));
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    std::size_t line_no() const noexcept { return line_no_; }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_no_, what); }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
    std::string line_;
};

std::string join_bands(const std::vector<Band>& bands, char sep) {
    std::string out;
    for (std::size_t i = 0; i < bands.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(bands[i]);
    }
    return out;
}

ScenarioConfig parse_config_line(LineReader& reader, const std::string& line, Role& role) {
    const auto tokens = text::split_ws(line);
    if (tokens.empty() || tokens[0] != "config") reader.fail("expected 'config' line");
    constexpr std::string_view keys[] = {"bands", "receivers", "signals", "steps", "p_detect",
                                         "p_hot", "hot",       "seed",    "role"};
    if (tokens.size() != 1 + std::size(keys)) reader.fail("config line must have " + std::to_string(std::size(keys)) + " fields");

    ScenarioConfig cfg;
    auto int_field = [&](std::string_view v, std::string_view key) {
        auto x = text::parse_int(v);
        if (!x || *x < 0 || *x > 1'000'000'000) reader.fail("bad integer for " + std::string(key));
        return static_cast<int>(*x);
    };
    for (std::size_t i = 0; i < std::size(keys); ++i) {
        const std::string_view tok = tokens[i + 1];
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos || tok.substr(0, eq) != keys[i])
            reader.fail("expected field '" + std::string(keys[i]) + "='");
        const std::string_view v = tok.substr(eq + 1);
        switch (i) {
            case 0: cfg.n_bands = int_field(v, keys[i]); break;
            case 1: cfg.n_receivers = int_field(v, keys[i]); break;
            case 2: cfg.n_signals = int_field(v, keys[i]); break;
            case 3: cfg.n_steps = int_field(v, keys[i]); break;
            case 4:
            case 5: {
                auto d = text::parse_double(v);
                if (!d) reader.fail("bad decimal for " + std::string(keys[i]));
                (i == 4 ? cfg.p_detect : cfg.p_hot) = *d;
                break;
            }
            case 6:
                cfg.hot_bands.clear();
                if (!v.empty())
                    for (auto part : text::split(v, ',')) cfg.hot_bands.push_back(int_field(part, "hot"));
                break;
            case 7: {
                auto s = text::parse_u64(v);
                if (!s) reader.fail("bad seed");
                cfg.seed = *s;
                break;
            }
            case 8:
                try {
                    role = parse_role(v);
                } catch (const std::invalid_argument& e) {
                    reader.fail(e.what());
                }
                break;
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        reader.fail(std::string("invalid config: ") + e.what());
    }
    return cfg;
}

}  // namespace

std::string_view to_string(Role role) {
    return role == Role::train ? "train" : "validation";
}

Role parse_role(std::string_view s) {
    if (s == "train") return Role::train;
    if (s == "validation") return Role::validation;
    throw std::invalid_argument("unknown role '" + std::string(s) + "'");
}

Dataset generate_dataset(const ScenarioConfig& cfg, std::size_t n_episodes, Role role) {
    cfg.validate();
    Dataset ds{cfg, std::vector<Episode>(n_episodes), role};
    const auto n = static_cast<std::int64_t>(n_episodes);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        ds.episodes[static_cast<std::size_t>(i)] = sample_episode_at(cfg, static_cast<std::uint64_t>(i));
    return ds;
}

Dataset generate_dataset_serial(const ScenarioConfig& cfg, std::size_t n_episodes, Role role) {
    cfg.validate();
    Dataset ds{cfg, {}, role};
    ds.episodes.reserve(n_episodes);
    for (std::size_t i = 0; i < n_episodes; ++i) ds.episodes.push_back(sample_episode_at(cfg, i));
    return ds;
}

std::vector<std::vector<std::uint8_t>> aggregate_matrix(const Episode& episode, int n_bands) {
    std::vector<std::vector<std::uint8_t>> m(static_cast<std::size_t>(episode.n_steps()),
                                             std::vector<std::uint8_t>(static_cast<std::size_t>(n_bands), 0));
    const auto placements = episode.placements();
    for (int t = 0; t < episode.n_steps(); ++t) {
        const auto bits = episode.bits_at(t);
        for (std::size_t s = 0; s < placements.size(); ++s)
            if (bits[s]) m[static_cast<std::size_t>(t)][static_cast<std::size_t>(placements[s])] = 1;
    }
    return m;
}

void write_dataset(std::ostream& out, const Dataset& ds) {
    const auto& c = ds.cfg;
    out << kMagic << '\n'
        << "config bands=" << c.n_bands << " receivers=" << c.n_receivers << " signals=" << c.n_signals
        << " steps=" << c.n_steps << " p_detect=" << text::shortest(c.p_detect)
        << " p_hot=" << text::shortest(c.p_hot) << " hot=" << join_bands(c.hot_bands, ',')
        << " seed=" << c.seed << " role=" << to_string(ds.role) << '\n'
        << "episodes " << ds.episodes.size() << '\n';
    std::string row;
    for (std::size_t i = 0; i < ds.episodes.size(); ++i) {
        const Episode& ep = ds.episodes[i];
        out << "--- " << i << '\n'
            << "placements " << join_bands({ep.placements().begin(), ep.placements().end()}, ' ') << '\n';
        for (int t = 0; t < ep.n_steps(); ++t) {
            row.clear();
            for (auto b : ep.bits_at(t)) row += b ? '1' : '0';
            out << row << '\n';
        }
    }
}

Dataset read_dataset(std::istream& in) {
    LineReader reader(in);
    if (reader.next("header") != kMagic) reader.fail("expected '" + std::string(kMagic) + "'");

    Dataset ds;
    ds.cfg = parse_config_line(reader, reader.next("config line"), ds.role);
    const auto& cfg = ds.cfg;

    const auto count_tokens = text::split_ws(reader.next("episodes line"));
    if (count_tokens.size() != 2 || count_tokens[0] != "episodes") reader.fail("expected 'episodes <count>'");
    const auto n_episodes = text::parse_u64(count_tokens[1]);
    if (!n_episodes) reader.fail("bad episode count");

    ds.episodes.reserve(*n_episodes);
    const auto width = static_cast<std::size_t>(cfg.n_signals);
    for (std::uint64_t i = 0; i < *n_episodes; ++i) {
        const auto sep = text::split_ws(reader.next("episode separator"));
        if (sep.size() != 2 || sep[0] != "---" || text::parse_u64(sep[1]) != i)
            reader.fail("expected '--- " + std::to_string(i) + "'");

        const auto pl = text::split_ws(reader.next("placements line"));
        if (pl.empty() || pl[0] != "placements") reader.fail("expected 'placements' line");
        if (pl.size() != width + 1)
            reader.fail("expected " + std::to_string(width) + " placements, got " + std::to_string(pl.size() - 1));
        std::vector<Band> placements;
        for (std::size_t s = 1; s < pl.size(); ++s) {
            auto b = text::parse_int(pl[s]);
            if (!b || *b < 0 || *b >= cfg.n_bands) reader.fail("placement out of range");
            placements.push_back(static_cast<Band>(*b));
        }

        std::vector<std::uint8_t> bits;
        bits.reserve(width * static_cast<std::size_t>(cfg.n_steps));
        for (int t = 0; t < cfg.n_steps; ++t) {
            const std::string line = reader.next("bit row");
            if (line.size() != width) {
                if (line.rfind("---", 0) == 0) reader.fail("episode " + std::to_string(i) + " has only " + std::to_string(t) + " bit rows, expected " + std::to_string(cfg.n_steps));
                reader.fail("bit row has " + std::to_string(line.size()) + " characters, expected " + std::to_string(width));
            }
            for (char ch : line) {
                if (ch != '0' && ch != '1') reader.fail(std::string("non-binary character '") + ch + "' in bit row");
                bits.push_back(ch == '1' ? 1 : 0);
            }
        }
        ds.episodes.emplace_back(std::move(placements), cfg.n_steps, std::move(bits));
    }

    std::string trailing;
    while (std::getline(in, trailing)) {
        if (!trailing.empty() && trailing != "\r")
            throw ParseError(reader.line_no() + 1, "unexpected content after last episode");
    }
    return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_dataset(out, dataset);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_dataset(in);
}

void write_aggregate(std::ostream& out, const Dataset& dataset) {
    std::string row;
    for (std::size_t i = 0; i < dataset.episodes.size(); ++i) {
        out << "--- " << i << '\n';
        for (const auto& r : aggregate_matrix(dataset.episodes[i], dataset.cfg.n_bands)) {
            row.clear();
            for (auto b : r) row += b ? '1' : '0';
            out << row << '\n';
        }
    }
}

}  // namespace rema
