#include "rema/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string_view>

#include "rema/text.hpp"

namespace rema::report {

namespace {

constexpr std::array<std::string_view, 8> kPalette = {"#d62728", "#ff7f0e", "#1f77b4", "#17becf",
                                                      "#2ca02c", "#9467bd", "#8c564b", "#7f7f7f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Round the axis top up to 1, 2 or 5 times a power of ten.
double nice_ceiling(double v) {
    if (!(v > 0.0)) return 1.0;
    const double p = std::pow(10.0, std::floor(std::log10(v)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * p >= v) return m * p;
    return 10.0 * p;
}

struct Frame {
    double width = 760;
    double height = 420;
    double left = 60;
    double right = 160;
    double top = 40;
    double bottom = 50;

    double plot_w() const { return width - left - right; }
    double plot_h() const { return height - top - bottom; }
};

void open_svg(std::ostream& out, const Frame& f, std::string_view title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
        << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << f.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";
}

void y_axis(std::ostream& out, const Frame& f, double y_max, std::string_view label) {
    const double x0 = f.left;
    const double y0 = f.top + f.plot_h();
    out << "<line x1=\"" << x0 << "\" y1=\"" << f.top << "\" x2=\"" << x0 << "\" y2=\"" << y0
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 + f.plot_w() << "\" y2=\"" << y0
        << "\" stroke=\"black\"/>\n";
    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double v = y_max * i / kTicks;
        const double y = y0 - f.plot_h() * i / kTicks;
        out << "<line x1=\"" << x0 - 4 << "\" y1=\"" << fmt(y) << "\" x2=\"" << x0 << "\" y2=\"" << fmt(y)
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << x0 - 6 << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">" << text::shortest(v)
            << "</text>\n";
    }
    out << "<text transform=\"translate(16," << f.top + f.plot_h() / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(label) << "</text>\n";
}

void legend(std::ostream& out, const Frame& f, const std::vector<std::string>& labels) {
    const double x = f.width - f.right + 15;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = f.top + 10 + 20.0 * static_cast<double>(i);
        out << "<rect x=\"" << x << "\" y=\"" << y - 10 << "\" width=\"12\" height=\"12\" fill=\""
            << kPalette[i % kPalette.size()] << "\"/>\n"
            << "<text x=\"" << x + 18 << "\" y=\"" << y << "\">" << escape(labels[i]) << "</text>\n";
    }
}

void bar(std::ostream& out, double x, double w, double y0, double h, std::string_view colour) {
    out << "<rect class=\"bar\" x=\"" << fmt(x) << "\" y=\"" << fmt(y0 - h) << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
        << "\" fill=\"" << colour << "\"/>\n";
}

}  // namespace

void detections_chart(std::ostream& out, const std::vector<RunSummary>& summaries) {
    const Frame f;
    open_svg(out, f, "Detected vs detectable signals per episode");
    double y_max = 0.0;
    for (const auto& s : summaries) y_max = std::max({y_max, s.mean_detectable, s.mean_detections});
    y_max = nice_ceiling(y_max);
    y_axis(out, f, y_max, "signals per episode (mean)");

    const double y0 = f.top + f.plot_h();
    const double group_w = f.plot_w() / std::max<std::size_t>(summaries.size(), 1);
    const double bar_w = group_w * 0.35;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        const double gx = f.left + group_w * static_cast<double>(i) + group_w * 0.15;
        bar(out, gx, bar_w, y0, f.plot_h() * s.mean_detectable / y_max, kPalette[0]);
        bar(out, gx + bar_w, bar_w, y0, f.plot_h() * s.mean_detections / y_max, kPalette[(i + 1) % kPalette.size()]);
        out << "<text x=\"" << fmt(gx + bar_w) << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\">"
            << escape(s.agent_label) << "</text>\n"
            << "<text x=\"" << fmt(gx + bar_w) << "\" y=\"" << y0 + 34 << "\" text-anchor=\"middle\">DR "
            << fmt(100.0 * s.mean_dr) << "%</text>\n";
    }
    std::vector<std::string> labels{"detectable"};
    for (const auto& s : summaries) labels.push_back(s.agent_label);
    legend(out, f, labels);
    out << "</svg>\n";
}

void visits_chart(std::ostream& out, const std::vector<RunSummary>& summaries) {
    const Frame f;
    open_svg(out, f, "Visited frequency bands per episode");
    const std::size_t n_bands = summaries.empty() ? 0 : summaries.front().mean_visits.size();
    double y_max = 0.0;
    for (const auto& s : summaries)
        for (std::size_t b = 0; b < s.mean_visits.size(); ++b)
            y_max = std::max(y_max, s.mean_visits[b] + s.std_visits[b]);
    y_max = nice_ceiling(y_max);
    y_axis(out, f, y_max, "visits per episode (mean)");

    const double y0 = f.top + f.plot_h();
    const double group_w = f.plot_w() / std::max<std::size_t>(n_bands, 1);
    const double bar_w = group_w * 0.8 / std::max<std::size_t>(summaries.size(), 1);
    for (std::size_t b = 0; b < n_bands; ++b) {
        const double gx = f.left + group_w * static_cast<double>(b) + group_w * 0.1;
        for (std::size_t i = 0; i < summaries.size(); ++i) {
            const auto& s = summaries[i];
            const double x = gx + bar_w * static_cast<double>(i);
            bar(out, x, bar_w, y0, f.plot_h() * s.mean_visits[b] / y_max, kPalette[i % kPalette.size()]);
            const double cx = x + bar_w / 2;
            const double lo = y0 - f.plot_h() * std::max(0.0, s.mean_visits[b] - s.std_visits[b]) / y_max;
            const double hi = y0 - f.plot_h() * (s.mean_visits[b] + s.std_visits[b]) / y_max;
            if (s.std_visits[b] > 0.0)
                out << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(lo) << "\" x2=\"" << fmt(cx) << "\" y2=\""
                    << fmt(hi) << "\" stroke=\"black\"/>\n";
        }
        out << "<text x=\"" << fmt(gx + group_w * 0.4) << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\">" << b
            << "</text>\n";
    }
    out << "<text x=\"" << f.left + f.plot_w() / 2 << "\" y=\"" << f.height - 8
        << "\" text-anchor=\"middle\">band</text>\n";
    std::vector<std::string> labels;
    for (const auto& s : summaries) labels.push_back(s.agent_label);
    legend(out, f, labels);
    out << "</svg>\n";
}

void trace_chart(std::ostream& out, const std::vector<Action>& trace, int n_bands, const std::string& title) {
    const Frame f;
    open_svg(out, f, title);
    const double y0 = f.top + f.plot_h();
    const double n_steps = std::max<double>(static_cast<double>(trace.size()), 1.0);
    const double band_h = f.plot_h() / std::max(n_bands, 1);

    out << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\"" << y0
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << f.left << "\" y1=\"" << y0 << "\" x2=\"" << f.left + f.plot_w() << "\" y2=\"" << y0
        << "\" stroke=\"black\"/>\n";
    for (int b = 0; b < n_bands; ++b)
        out << "<text x=\"" << f.left - 6 << "\" y=\"" << fmt(y0 - band_h * (b + 0.5) + 4)
            << "\" text-anchor=\"end\">" << b << "</text>\n";
    for (int t = 0; t <= static_cast<int>(n_steps); t += 10)
        out << "<text x=\"" << fmt(f.left + f.plot_w() * t / n_steps) << "\" y=\"" << y0 + 16
            << "\" text-anchor=\"middle\">" << t << "</text>\n";
    out << "<text x=\"" << f.left + f.plot_w() / 2 << "\" y=\"" << f.height - 8
        << "\" text-anchor=\"middle\">step</text>\n"
        << "<text transform=\"translate(16," << f.top + f.plot_h() / 2
        << ") rotate(-90)\" text-anchor=\"middle\">band</text>\n";

    std::size_t n_receivers = 0;
    for (std::size_t t = 0; t < trace.size(); ++t) {
        n_receivers = std::max(n_receivers, trace[t].positions.size());
        for (std::size_t r = 0; r < trace[t].positions.size(); ++r) {
            const double cx = f.left + f.plot_w() * (static_cast<double>(t) + 0.5) / n_steps;
            const double cy = y0 - band_h * (trace[t].positions[r] + 0.5) + (r == 0 ? -2.0 : 2.0);
            out << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"2.5\" fill=\""
                << kPalette[(r + 2) % kPalette.size()] << "\"/>\n";
        }
    }
    std::vector<std::string> labels;
    for (std::size_t r = 0; r < n_receivers; ++r) labels.push_back("receiver " + std::to_string(r));
    // legend colours follow the receiver offset used above
    const double x = f.width - f.right + 15;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = f.top + 10 + 20.0 * static_cast<double>(i);
        out << "<circle cx=\"" << x + 6 << "\" cy=\"" << y - 4 << "\" r=\"4\" fill=\""
            << kPalette[(i + 2) % kPalette.size()] << "\"/>\n"
            << "<text x=\"" << x + 18 << "\" y=\"" << y << "\">" << escape(labels[i]) << "</text>\n";
    }
    out << "</svg>\n";
}

void table(std::ostream& out, const std::vector<RunSummary>& summaries) {
    char buf[128];
    out << "agent            episodes  undefined   mean_dr    std_dr  detections  detectable  visits\n";
    for (const auto& s : summaries) {
        std::snprintf(buf, sizeof buf, "%-16s %8zu %10zu %9.4f %9.4f %11.2f %11.2f ", s.agent_label.c_str(),
                      s.n_episodes, s.n_undefined, s.mean_dr, s.std_dr, s.mean_detections, s.mean_detectable);
        out << buf;
        for (std::size_t b = 0; b < s.mean_visits.size(); ++b) {
            std::snprintf(buf, sizeof buf, "%s%.2f", b ? " " : "", s.mean_visits[b]);
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace rema::report
