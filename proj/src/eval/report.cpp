#include "aad/eval.hpp"

#include "aad/error.hpp"
#include "aad/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace aad::eval {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string window_text(double w) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", w);
    return buf;
}

// Terminal columns, counting each UTF-8 code point once.
std::size_t display_width(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(std::string s, std::size_t width) {
    const std::size_t w = display_width(s);
    if (w < width) s.append(width - w, ' ');
    return s;
}

// Shallow features first, then last-layer, then first/middle/last assemblies,
// each in model-table order.
int feature_rank(std::string_view f) {
    static const std::vector<std::string> models{"albert", "mockingjay", "tera", "hubert", "wav2vec2", "wavlm"};
    if (f == "envelope") return 0;
    if (f == "melspec") return 1;
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (f == models[i] + "_ll") return 10 + static_cast<int>(i);
        if (f == models[i] + "_fml") return 20 + static_cast<int>(i);
    }
    return 100;
}

int feature_group(std::string_view f) { return feature_rank(f) / 10; }

bool same_window(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace

std::string feature_display_name(std::string_view feature) {
    if (feature == "envelope") return "Envelope";
    if (feature == "melspec") return "Spectrogram";
    static const std::map<std::string, std::string, std::less<>> names{
        {"albert", "Albert"}, {"mockingjay", "Mockingjay"}, {"tera", "Tera"},
        {"hubert", "Hubert"}, {"wav2vec2", "Wav2Vec2"},     {"wavlm", "WavLM"}};
    const auto us = feature.rfind('_');
    if (us != std::string_view::npos)
        if (const auto it = names.find(feature.substr(0, us)); it != names.end())
            return it->second + std::string(feature.substr(us));
    std::string out(feature);
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::string render_csv(const EvaluationReport& report) {
    report.validate();
    std::ostringstream os;
    os << "dataset,subject,feature,layer_mode,decoder_mode,window_s,accuracy,std,n_windows,n_ties\n";
    for (const auto& r : report.rows)
        os << r.key.dataset << ',' << r.key.subject << ',' << r.key.feature << ',' << r.key.layer_mode << ','
           << r.decoder_mode << ',' << window_text(r.window_s) << ',' << fixed(r.accuracy, 6) << ','
           << fixed(r.std, 6) << ',' << r.n_windows << ',' << r.n_ties << '\n';
    return os.str();
}

EvaluationReport parse_csv(std::string_view text) {
    EvaluationReport rep;
    std::istringstream is{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line.rfind("dataset,subject,feature", 0) != 0)
                throw FormatError("report CSV: unexpected header '" + line + "'");
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 10)
            throw FormatError("report CSV line " + std::to_string(line_no) + ": expected 10 fields, got " +
                              std::to_string(f.size()));
        ReportRow r;
        r.key = {f[0], f[1], f[2], f[3]};
        r.decoder_mode = f[4];
        try {
            r.window_s = std::stod(f[5]);
            r.accuracy = std::stod(f[6]);
            r.std = std::stod(f[7]);
            r.n_windows = std::stoul(f[8]);
            r.n_ties = std::stoul(f[9]);
        } catch (const std::logic_error&) {
            throw FormatError("report CSV line " + std::to_string(line_no) + ": malformed number");
        }
        rep.rows.push_back(std::move(r));
    }
    rep.validate();
    return rep;
}

std::string render_table(const EvaluationReport& report, double window_s) {
    const auto rows = report.subject_rows();
    std::set<std::string> dataset_set;
    std::set<std::string> feature_set;
    // (feature, mode, dataset) -> subject accuracies; dataset "" collects Avg.
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> cells;
    for (const auto& r : rows) {
        if (!same_window(r.window_s, window_s)) continue;
        dataset_set.insert(r.key.dataset);
        feature_set.insert(r.key.feature);
        cells[{r.key.feature, r.decoder_mode, r.key.dataset}].push_back(r.accuracy);
        cells[{r.key.feature, r.decoder_mode, ""}].push_back(r.accuracy);
    }
    if (feature_set.empty()) throw ValidationError("no report rows at window " + window_text(window_s) + " s");

    std::vector<std::string> features(feature_set.begin(), feature_set.end());
    std::stable_sort(features.begin(), features.end(),
                     [](const auto& a, const auto& b) { return feature_rank(a) < feature_rank(b); });
    std::vector<std::string> columns(dataset_set.begin(), dataset_set.end());
    columns.push_back("");  // Avg

    auto cell = [&](const std::string& f, const std::string& mode, const std::string& ds) -> std::string {
        const auto it = cells.find({f, mode, ds});
        if (it == cells.end()) return "n/a";
        double m = 0.0;
        for (double v : it->second) m += v;
        m /= static_cast<double>(it->second.size());
        double s = 0.0;
        for (double v : it->second) s += (v - m) * (v - m);
        s = std::sqrt(s / static_cast<double>(it->second.size()));
        return fixed(m, 2) + " ± " + fixed(s, 2);
    };

    // Grid: header row, then one row per feature; column 0 is the feature name.
    const std::vector<std::string> modes{"attended", "unattended"};
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> head{"Feature"};
    for (std::size_t m = 0; m < modes.size(); ++m)
        for (const auto& c : columns) head.push_back(c.empty() ? "Avg" : c);
    grid.push_back(head);
    for (const auto& f : features) {
        std::vector<std::string> row{feature_display_name(f)};
        for (const auto& mode : modes)
            for (const auto& c : columns) row.push_back(cell(f, mode, c));
        grid.push_back(std::move(row));
    }
    std::vector<std::size_t> width(grid.front().size(), 0);
    for (const auto& row : grid)
        for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], display_width(row[j]));

    const std::size_t per_group = columns.size();
    auto group_width = [&](std::size_t g) {
        std::size_t w = 0;
        for (std::size_t j = 0; j < per_group; ++j) w += width[1 + g * per_group + j] + (j ? 2 : 0);
        return w;
    };
    const std::vector<std::string> group_titles{"Attended Decoder", "Unattended Decoder"};
    for (std::size_t g = 0; g < 2; ++g) {
        const std::size_t need = display_width(group_titles[g]);
        const std::size_t have = group_width(g);
        if (need > have) width[1 + g * per_group + per_group - 1] += need - have;
    }

    auto render_row = [&](const std::vector<std::string>& row) {
        std::string line = pad(row[0], width[0]);
        for (std::size_t g = 0; g < 2; ++g) {
            line += " | ";
            for (std::size_t j = 0; j < per_group; ++j) {
                const std::size_t col = 1 + g * per_group + j;
                if (j) line += "  ";
                line += pad(row[col], width[col]);
            }
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        return line + "\n";
    };
    auto rule = [&](char ch) {
        std::string line(width[0], ch);
        for (std::size_t g = 0; g < 2; ++g) line += std::string(1, ch) + "+" + std::string(group_width(g) + 1, ch);
        return line + "\n";
    };

    std::string out = "Window " + window_text(window_s) + " s\n";
    std::string titles = pad("", width[0]);
    for (std::size_t g = 0; g < 2; ++g) titles += " | " + pad(group_titles[g], group_width(g));
    while (!titles.empty() && titles.back() == ' ') titles.pop_back();
    out += titles + "\n";
    out += render_row(grid[0]);
    out += rule('-');
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (i > 1 && feature_group(features[i - 1]) != feature_group(features[i - 2])) out += rule('-');
        out += render_row(grid[i]);
    }
    return out;
}

void write_report(const EvaluationReport& report, const std::filesystem::path& dir) {
    atomic_write_text(dir / "report.csv", render_csv(report));

    std::set<double> windows;
    for (const auto& r : report.rows) windows.insert(r.window_s);
    std::string tables;
    for (double w : windows) {
        if (!tables.empty()) tables += "\n";
        tables += render_table(report, w);
    }
    atomic_write_text(dir / "table.txt", tables);

    // accuracy-vs-window-size curve per (dataset, feature, mode), from the aggregate rows.
    std::map<std::string, std::vector<std::pair<double, double>>> curves;
    for (const auto& r : report.rows)
        if (r.key.subject == kAggregateSubject)
            curves[r.key.dataset + "." + r.key.feature + "." + r.decoder_mode].emplace_back(r.window_s, r.accuracy);
    for (auto& [key, pts] : curves) {
        std::sort(pts.begin(), pts.end());
        std::string text;
        for (const auto& [w, a] : pts) text += window_text(w) + " " + fixed(a, 6) + "\n";
        atomic_write_text(dir / ("accuracy." + key + ".dat"), text);
    }
}

std::string render_weight_energy(const decoder::Decoder& decoder) {
    const auto delays = decoder.lag_config.delays_ms();
    const auto energy = decoder::weight_energy_profile(decoder);
    std::string out;
    for (std::size_t l = 0; l < delays.size(); ++l) out += format_double(delays[l]) + " " + fixed(energy[l], 9) + "\n";
    return out;
}

}  // namespace aad::eval
