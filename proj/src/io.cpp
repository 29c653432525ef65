#include "pseudoscope/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pseudoscope/errors.hpp"
#include "pseudoscope/geometry.hpp"
#include "pseudoscope/text.hpp"

namespace pseudoscope::io {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kCrlf = "\r\n";
constexpr double kCanvas = 800.0;
constexpr std::size_t kOverlaySamples = 512;

std::string num(double x) { return text::format_double(x); }

Json quantiles_json(const Quantiles& q) {
    return Json{{"q50", q.q50}, {"q90", q.q90}, {"q99", q.q99}, {"q999", q.q999}, {"max", q.max}};
}

Json optional_number(const std::optional<double>& x) {
    return x && std::isfinite(*x) ? Json(*x) : Json(nullptr);
}

std::string xml_escape(std::string_view s) {
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

std::string fixed(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

// Maps complex-plane points onto a square canvas. Both axes share one scale so
// circles stay round; the longer extent gets a 10% margin on each side.
class PlaneFrame {
public:
    explicit PlaneFrame(const std::vector<Complex>& points) {
        double xmin = std::numeric_limits<double>::infinity();
        double xmax = -xmin;
        double ymin = xmin;
        double ymax = -xmin;
        for (Complex z : points) {
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                continue;
            }
            xmin = std::min(xmin, z.real());
            xmax = std::max(xmax, z.real());
            ymin = std::min(ymin, z.imag());
            ymax = std::max(ymax, z.imag());
        }
        if (!(xmin <= xmax)) {
            xmin = ymin = -1.0;
            xmax = ymax = 1.0;
        }
        const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
        const double half = 0.5 * span * 1.2;
        cx_ = 0.5 * (xmin + xmax);
        cy_ = 0.5 * (ymin + ymax);
        half_ = half;
    }

    double x(Complex z) const { return (z.real() - cx_ + half_) / (2.0 * half_) * kCanvas; }
    double y(Complex z) const { return (cy_ + half_ - z.imag()) / (2.0 * half_) * kCanvas; }
    double xmin() const { return cx_ - half_; }
    double xmax() const { return cx_ + half_; }
    double ymin() const { return cy_ - half_; }
    double ymax() const { return cy_ + half_; }

private:
    double cx_ = 0.0;
    double cy_ = 0.0;
    double half_ = 1.0;
};

struct Overlay {
    std::vector<Complex> points;
    bool closed = true;
    std::string stroke;
};

std::vector<Complex> circle(Complex center, double radius) {
    std::vector<Complex> pts;
    for (std::size_t k = 0; k < kOverlaySamples; ++k) {
        pts.push_back(center + std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(k) /
                                                      static_cast<double>(kOverlaySamples)));
    }
    return pts;
}

std::vector<Complex> symbol_circle(const PolySymbol& p, double radius) {
    std::vector<Complex> pts;
    for (std::size_t k = 0; k < kOverlaySamples; ++k) {
        pts.push_back(p(std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(k) /
                                               static_cast<double>(kOverlaySamples))));
    }
    return pts;
}

std::vector<Overlay> region_overlays(const ConcentrationReport& report) {
    const auto& cfg = report.config;
    const TheoremRegion region(cfg.structure, cfg.d, *cfg.delta, *cfg.tau);
    std::vector<Overlay> out;
    std::visit(
        [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, DiskUnion>) {
                for (Complex c : r.centers()) {
                    out.push_back({circle(c, r.radius()), true, "#d62728"});
                }
            } else if constexpr (std::is_same_v<R, Annulus>) {
                out.push_back({circle(r.center(), r.scale()), true, "#7f7f7f"});
                if (r.inner() > 0.0) {
                    out.push_back({circle(r.center(), r.inner()), true, "#d62728"});
                }
                out.push_back({circle(r.center(), r.outer()), true, "#d62728"});
            } else if constexpr (std::is_same_v<R, SymbolBand>) {
                const auto curve = symbol_image_curve(r.symbol(), kOverlaySamples);
                out.push_back({std::vector<Complex>(curve.begin(), curve.end() - 1), true, "#7f7f7f"});
                out.push_back({symbol_circle(r.symbol(), 1.0 - r.delta()), true, "#d62728"});
                out.push_back({symbol_circle(r.symbol(), 1.0 + r.delta()), true, "#d62728"});
            }
        },
        region.primary());
    if (region.exclusion()) {
        for (Complex c : region.exclusion()->critical_values()) {
            out.push_back({circle(c, region.exclusion()->tau()), true, "#2ca02c"});
        }
    }
    return out;
}

std::string path_data(const std::vector<Complex>& pts, const PlaneFrame& frame, bool closed) {
    std::string d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        d += (i == 0 ? "M" : " L");
        d += fixed(frame.x(pts[i])) + " " + fixed(frame.y(pts[i]));
    }
    if (closed) {
        d += " Z";
    }
    return d;
}

void svg_open(std::ostringstream& svg, const std::string& title) {
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kCanvas << "\" height=\""
        << kCanvas << "\" viewBox=\"0 0 " << kCanvas << " " << kCanvas << "\">\n"
        << "<title>" << xml_escape(title) << "</title>\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << kCanvas << "\" height=\"" << kCanvas
        << "\" fill=\"white\" stroke=\"black\"/>\n";
}

void svg_label(std::ostringstream& svg, double x, double y, const std::string& label) {
    svg << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(y)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(label) << "</text>\n";
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error("malformed JSON in " + path.string() + ": " + e.what());
    }
}

}  // namespace

std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(value);
    }
    std::string out = "\"";
    for (char c : value) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    out += '"';
    return out;
}

std::vector<std::string> parse_csv_record(std::string_view record) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < record.size(); ++i) {
        const char c = record[i];
        if (quoted) {
            if (c == '"' && i + 1 < record.size() && record[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"' && fields.back().empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    if (quoted) {
        throw InvalidArgument("unterminated quoted CSV field");
    }
    return fields;
}

void write_eigenvalues_csv(std::ostream& out, const ConcentrationReport& report) {
    out << "trial,index,re,im" << kCrlf;
    for (const auto& rec : report.records) {
        if (rec.failed) {
            continue;
        }
        const auto& eig = rec.spectrum.eigenvalues;
        for (std::size_t k = 0; k < eig.size(); ++k) {
            out << rec.index << ',' << k << ',' << num(eig[k].real()) << ',' << num(eig[k].imag()) << kCrlf;
        }
    }
}

std::vector<EigenvalueRow> read_eigenvalues_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidArgument("eigenvalues CSV is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "trial,index,re,im") {
        throw InvalidArgument("unexpected eigenvalues CSV header '" + line + "'");
    }
    std::vector<EigenvalueRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto f = parse_csv_record(line);
        if (f.size() != 4) {
            throw InvalidArgument("eigenvalues CSV line " + std::to_string(line_no) + ": expected 4 fields");
        }
        rows.push_back({static_cast<std::size_t>(text::parse_unsigned(f[0])),
                        static_cast<std::size_t>(text::parse_unsigned(f[1])),
                        Complex(text::parse_double(f[2]), text::parse_double(f[3]))});
    }
    return rows;
}

void write_trials_csv(std::ostream& out, const ConcentrationReport& report) {
    out << "trial,failed,contained,max_deviation,eigenvalues_contained,rescued,trace_shift_re,trace_shift_im,"
           "residual,error"
        << kCrlf;
    for (const auto& rec : report.records) {
        out << rec.index << ',' << (rec.failed ? 1 : 0) << ',';
        if (rec.failed) {
            out << ",,,,,,,";
        } else {
            out << (rec.contained ? 1 : 0) << ',' << num(rec.max_deviation) << ',' << rec.eigenvalues_contained
                << ',' << rec.rescued << ',' << num(rec.trace_shift.real()) << ',' << num(rec.trace_shift.imag())
                << ',' << num(rec.spectrum.residual) << ',';
        }
        out << csv_field(rec.error) << kCrlf;
    }
}

std::string config_json(const ExperimentConfig& cfg) {
    Json j;
    j["structure"] = to_string(cfg.structure);
    j["d"] = cfg.d;
    j["eps"] = cfg.eps;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["solver"] = cfg.solver ? Json(std::string(to_string(*cfg.solver))) : Json(nullptr);
    j["delta"] = optional_number(cfg.delta);
    j["tau"] = optional_number(cfg.tau);
    return j.dump();
}

std::string report_json(const ConcentrationReport& report, const std::string& eigenvalues_file) {
    Json j;
    j["schema"] = kReportSchema;
    j["config"] = Json::parse(config_json(report.config));
    j["completed_trials"] = report.completed_trials;
    j["failed_trials"] = report.failed_trials;
    j["containment_fraction"] = report.containment_fraction;
    j["eigenvalue_containment_fraction"] = report.eigenvalue_containment_fraction;
    j["rescued_fraction"] = report.rescued_fraction;
    j["deviation_quantiles"] = quantiles_json(report.deviation);
    j["eigenvalue_deviation_quantiles"] = quantiles_json(report.eigenvalue_deviation);
    j["trace_shift"] = Json{{"mean_re", report.trace_shift_mean.real()},
                            {"mean_im", report.trace_shift_mean.imag()},
                            {"variance", report.trace_shift_variance}};
    j["max_residual"] = report.max_residual;
    j["wall_seconds"] = report.wall_seconds;
    j["eigenvalues_csv"] = eigenvalues_file;
    j["trials_csv"] = "trials.csv";
    Json failures = Json::array();
    for (const auto& rec : report.records) {
        if (rec.failed) {
            failures.push_back(Json{{"trial", rec.index}, {"error", rec.error}});
        }
    }
    j["failures"] = failures;
    return j.dump(2) + "\n";
}

std::string scatter_svg(const ConcentrationReport& report) {
    const auto overlays = region_overlays(report);
    std::vector<Complex> all;
    for (const auto& rec : report.records) {
        all.insert(all.end(), rec.spectrum.eigenvalues.begin(), rec.spectrum.eigenvalues.end());
    }
    for (const auto& o : overlays) {
        all.insert(all.end(), o.points.begin(), o.points.end());
    }
    const PlaneFrame frame(all);

    std::ostringstream svg;
    svg_open(svg, to_string(report.config.structure) + ", d = " + std::to_string(report.config.d) +
                      ", eps = " + num(report.config.eps) + ", N = " + std::to_string(report.completed_trials));
    const double x0 = frame.x(Complex(0.0, 0.0));
    const double y0 = frame.y(Complex(0.0, 0.0));
    if (x0 >= 0.0 && x0 <= kCanvas) {
        svg << "<line x1=\"" << fixed(x0) << "\" y1=\"0\" x2=\"" << fixed(x0) << "\" y2=\"" << kCanvas
            << "\" stroke=\"#cccccc\"/>\n";
    }
    if (y0 >= 0.0 && y0 <= kCanvas) {
        svg << "<line x1=\"0\" y1=\"" << fixed(y0) << "\" x2=\"" << kCanvas << "\" y2=\"" << fixed(y0)
            << "\" stroke=\"#cccccc\"/>\n";
    }
    svg << "<g fill=\"#1f77b4\" fill-opacity=\"0.5\" stroke=\"none\">\n";
    for (const auto& rec : report.records) {
        for (Complex z : rec.spectrum.eigenvalues) {
            svg << "<circle cx=\"" << fixed(frame.x(z)) << "\" cy=\"" << fixed(frame.y(z)) << "\" r=\"1.2\"/>\n";
        }
    }
    svg << "</g>\n<g fill=\"none\" stroke-width=\"1.2\">\n";
    for (const auto& o : overlays) {
        svg << "<path stroke=\"" << o.stroke << "\" d=\"" << path_data(o.points, frame, o.closed) << "\"/>\n";
    }
    svg << "</g>\n";
    svg_label(svg, 8.0, kCanvas - 8.0,
              "re [" + num(frame.xmin()) + ", " + num(frame.xmax()) + "], im [" + num(frame.ymin()) + ", " +
                  num(frame.ymax()) + "]");
    svg << "</svg>\n";
    return svg.str();
}

void write_scaling_csv(std::ostream& out, const ScalingFit& fit) {
    out << "d,median_deviation,q90_deviation" << kCrlf;
    for (const auto& p : fit.points) {
        out << p.d << ',' << num(p.median_deviation) << ',' << num(p.q90_deviation) << kCrlf;
    }
}

std::string scaling_json(const ScalingFit& fit, const Structure& structure, double eps, std::size_t trials,
                         std::uint64_t seed) {
    Json j;
    j["schema"] = kScalingSchema;
    j["structure"] = to_string(structure);
    j["eps"] = eps;
    j["trials"] = trials;
    j["seed"] = seed;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    Json points = Json::array();
    for (const auto& p : fit.points) {
        points.push_back(Json{{"d", p.d}, {"median_deviation", p.median_deviation}, {"q90_deviation", p.q90_deviation}});
    }
    j["points"] = points;
    j["scaling_csv"] = "scaling.csv";
    return j.dump(2) + "\n";
}

std::string scaling_svg(const ScalingFit& fit) {
    std::vector<Complex> pts;
    for (const auto& p : fit.points) {
        pts.emplace_back(std::log(static_cast<double>(p.d)), std::log(p.median_deviation));
    }
    const PlaneFrame frame(pts);
    std::ostringstream svg;
    svg_open(svg, "log median deviation against log d, slope " + num(fit.slope));
    if (!pts.empty()) {
        const double a = pts.front().real();
        const double b = pts.back().real();
        const std::vector<Complex> line = {Complex(a, fit.intercept + fit.slope * a),
                                           Complex(b, fit.intercept + fit.slope * b)};
        svg << "<path fill=\"none\" stroke=\"#d62728\" d=\"" << path_data(line, frame, false) << "\"/>\n";
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        svg << "<circle cx=\"" << fixed(frame.x(pts[i])) << "\" cy=\"" << fixed(frame.y(pts[i]))
            << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
        svg_label(svg, frame.x(pts[i]) + 6.0, frame.y(pts[i]) - 6.0, "d = " + std::to_string(fit.points[i].d));
    }
    svg_label(svg, 8.0, kCanvas - 8.0, "slope " + num(fit.slope) + ", intercept " + num(fit.intercept));
    svg << "</svg>\n";
    return svg.str();
}

void write_tails_csv(std::ostream& out, const TailTable& table) {
    out << "which,series,t,empirical,standard_error,reference,reference_kind,row_pass,fitted_name,fitted,"
           "ks_statistic,ks_limit,monotone,verdict"
        << kCrlf;
    const auto opt = [](const std::optional<double>& x) { return x ? num(*x) : std::string(); };
    for (const auto& row : table.rows) {
        out << table.which << ',' << row.series << ',' << num(row.t) << ',' << num(row.empirical) << ','
            << num(row.standard_error) << ',' << (std::isnan(row.reference) ? "" : num(row.reference)) << ','
            << row.reference_kind << ',' << (row.pass ? "pass" : "fail") << ',' << table.fitted_name << ','
            << opt(table.fitted) << ',' << opt(table.ks_statistic) << ',' << opt(table.ks_limit) << ','
            << (table.monotone ? 1 : 0) << ',' << (table.pass ? "pass" : "fail") << kCrlf;
    }
}

std::string tails_json(const TailTable& table) {
    Json j;
    j["schema"] = kTailsSchema;
    j["which"] = table.which;
    j["d"] = table.d;
    j["samples"] = table.samples;
    j["seed"] = table.seed;
    j["fitted_name"] = table.fitted_name;
    j["fitted"] = optional_number(table.fitted);
    j["ks_statistic"] = optional_number(table.ks_statistic);
    j["ks_limit"] = optional_number(table.ks_limit);
    j["monotone"] = table.monotone;
    j["verdict"] = table.pass ? "pass" : "fail";
    j["tails_csv"] = "tails.csv";
    return j.dump(2) + "\n";
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex += kHex[digest[i] >> 4];
        hex += kHex[digest[i] & 0xf];
    }
    return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return sha256_hex(buffer.str());
}

void write_file(const std::filesystem::path& dir, const std::string& name, std::string_view contents) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw Error("cannot write " + path.string());
    }
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const std::string& config_path,
                    const std::string& config_echo, const std::vector<std::string>& files) {
    Json j;
    j["schema"] = kManifestSchema;
    j["command"] = command;
    j["config_path"] = config_path;
    j["config"] = Json::parse(config_echo);
    j["output_dir"] = std::filesystem::absolute(dir).lexically_normal().string();
    Json artifacts = Json::array();
    for (const auto& file : files) {
        const auto path = dir / file;
        artifacts.push_back(Json{{"file", file},
                                 {"sha256", sha256_file(path)},
                                 {"bytes", std::filesystem::file_size(path)}});
    }
    j["artifacts"] = artifacts;
    write_file(dir, "manifest.json", j.dump(2) + "\n");
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
    const Json j = read_json_file(dir / "manifest.json");
    if (j.value("schema", "") != kManifestSchema) {
        throw Error("manifest.json has an unsupported schema");
    }
    std::vector<std::string> bad;
    for (const auto& a : j.at("artifacts")) {
        const std::string file = a.at("file").get<std::string>();
        const auto path = dir / file;
        std::error_code ec;
        if (!std::filesystem::is_regular_file(path, ec) ||
            std::filesystem::file_size(path, ec) != a.at("bytes").get<std::uintmax_t>() ||
            sha256_file(path) != a.at("sha256").get<std::string>()) {
            bad.push_back(file);
        }
    }
    return bad;
}

}  // namespace pseudoscope::io
