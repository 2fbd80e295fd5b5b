#include "jexplore/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "jexplore/csv.hpp"
#include "jexplore/errors.hpp"

namespace jexplore {

namespace {

void require_metrics(const SampleRecord& record) {
    if (!record.power_w || !record.time_s) {
        throw SchemaError("record " + record.sample_id + " lacks power_w or time_s");
    }
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = shared;
        }
        i = j + 1;
    }
    return ranks;
}

}  // namespace

std::vector<std::string> pareto_front(const std::vector<SampleRecord>& records) {
    for (const SampleRecord& record : records) {
        require_metrics(record);
    }
    std::vector<std::string> front;
    for (std::size_t i = 0; i < records.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < records.size() && !dominated; ++j) {
            if (j == i) {
                continue;
            }
            const bool leq = *records[j].power_w <= *records[i].power_w &&
                             *records[j].time_s <= *records[i].time_s;
            const bool lt = *records[j].power_w < *records[i].power_w ||
                            *records[j].time_s < *records[i].time_s;
            dominated = leq && lt;
        }
        if (!dominated) {
            front.push_back(records[i].sample_id);
        }
    }
    return front;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ArgumentError("spearman inputs differ in length");
    }
    if (x.size() < 2) {
        throw ArgumentError("spearman needs at least 2 points");
    }
    for (const double v : x) {
        if (!std::isfinite(v)) throw ArgumentError("spearman inputs must be finite");
    }
    for (const double v : y) {
        if (!std::isfinite(v)) throw ArgumentError("spearman inputs must be finite");
    }
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mean = (n + 1.0) / 2.0;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw ArgumentError("spearman is undefined when one input is constant");
    }
    return sxy / std::sqrt(sxx * syy);
}

EmcCutoffReport emc_cutoff_report(const std::vector<SampleRecord>& records,
                                  const ConfigSpace& space, double gap_threshold) {
    if (space.params.size() != kConfigParamCount) {
        throw ArgumentError("emc_cutoff_report needs an 8-parameter space");
    }
    if (gap_threshold <= 0.0 || !std::isfinite(gap_threshold)) {
        throw ArgumentError("gap threshold must be positive");
    }
    std::vector<const SampleRecord*> timed;
    for (const SampleRecord& record : records) {
        if (record.time_s) {
            timed.push_back(&record);
        }
    }
    if (timed.size() < 4) {
        throw InsufficientDataError("EMC cut-off detection needs at least 4 records with "
                                    "time_s, got " +
                                    std::to_string(timed.size()));
    }
    std::stable_sort(timed.begin(), timed.end(), [](const SampleRecord* a, const SampleRecord* b) {
        return *a->time_s < *b->time_s;
    });

    std::vector<double> gaps;
    gaps.reserve(timed.size() - 1);
    for (std::size_t i = 0; i + 1 < timed.size(); ++i) {
        gaps.push_back(*timed[i + 1]->time_s - *timed[i]->time_s);
    }
    std::size_t largest_at = 0;
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        if (gaps[i] > gaps[largest_at]) {
            largest_at = i;
        }
    }
    std::vector<double> sorted_gaps = gaps;
    std::sort(sorted_gaps.begin(), sorted_gaps.end());
    const std::size_t m = sorted_gaps.size();
    const double median_gap = (m % 2 == 1)
                                  ? sorted_gaps[m / 2]
                                  : 0.5 * (sorted_gaps[m / 2 - 1] + sorted_gaps[m / 2]);

    EmcCutoffReport report;
    report.gap_s = gaps[largest_at];
    report.separated = report.gap_s > gap_threshold * median_gap;
    if (!report.separated) {
        return report;
    }

    const std::int64_t lowest_emc = space.params[7].values.front();
    std::size_t cluster_lowest = 0;
    for (std::size_t i = largest_at + 1; i < timed.size(); ++i) {
        report.cluster_ids.push_back(timed[i]->sample_id);
        if (timed[i]->config.emc_freq_khz == lowest_emc) {
            ++cluster_lowest;
        }
    }
    std::size_t lowest_total = 0;
    for (const SampleRecord* record : timed) {
        if (record->config.emc_freq_khz == lowest_emc) {
            ++lowest_total;
        }
    }
    report.all_cluster_lowest_emc = cluster_lowest == report.cluster_ids.size();
    report.all_lowest_emc_in_cluster = lowest_total == cluster_lowest && lowest_total > 0;
    return report;
}

AnalysisReport analyze(const std::filesystem::path& csv_path, const ConfigSpace& space,
                       double gap_threshold) {
    const std::vector<SampleRecord> all = read_csv(csv_path);
    std::vector<SampleRecord> ok;
    for (const SampleRecord& record : all) {
        if (record.status == SampleStatus::Ok) {
            ok.push_back(record);
        }
    }
    if (ok.empty()) {
        throw InsufficientDataError("no ok records to analyze in " + csv_path.string());
    }
    std::vector<double> powers;
    std::vector<double> times;
    for (const SampleRecord& record : ok) {
        require_metrics(record);
        powers.push_back(*record.power_w);
        times.push_back(*record.time_s);
    }

    AnalysisReport report;
    report.n_samples = ok.size();
    report.power_min_w = *std::min_element(powers.begin(), powers.end());
    report.power_max_w = *std::max_element(powers.begin(), powers.end());
    report.time_min_s = *std::min_element(times.begin(), times.end());
    report.time_max_s = *std::max_element(times.begin(), times.end());
    report.spearman_rho = spearman(powers, times);
    report.pareto_ids = pareto_front(ok);
    report.emc_cutoff = emc_cutoff_report(ok, space, gap_threshold);
    return report;
}

std::string report_to_json(const AnalysisReport& report) {
    nlohmann::ordered_json doc;
    doc["n_samples"] = report.n_samples;
    doc["power_min_w"] = report.power_min_w;
    doc["power_max_w"] = report.power_max_w;
    doc["time_min_s"] = report.time_min_s;
    doc["time_max_s"] = report.time_max_s;
    doc["spearman_rho"] = report.spearman_rho;
    doc["pareto_ids"] = report.pareto_ids;
    nlohmann::ordered_json cutoff;
    cutoff["separated"] = report.emc_cutoff.separated;
    cutoff["gap_s"] = report.emc_cutoff.gap_s;
    cutoff["cluster_ids"] = report.emc_cutoff.cluster_ids;
    cutoff["all_cluster_lowest_emc"] = report.emc_cutoff.all_cluster_lowest_emc;
    cutoff["all_lowest_emc_in_cluster"] = report.emc_cutoff.all_lowest_emc_in_cluster;
    doc["emc_cutoff"] = std::move(cutoff);
    return doc.dump(2) + "\n";
}

namespace {

// Tick spacing of roughly (hi-lo)/5 rounded to 1/2/5 * 10^k.
double nice_tick_step(double lo, double hi) {
    const double raw = (hi - lo) / 5.0;
    const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
    const double residual = raw / magnitude;
    double factor = 10.0;
    if (residual <= 1.0) {
        factor = 1.0;
    } else if (residual <= 2.0) {
        factor = 2.0;
    } else if (residual <= 5.0) {
        factor = 5.0;
    }
    return factor * magnitude;
}

std::string trim_number(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

}  // namespace

std::string scatter_svg(const std::vector<SampleRecord>& records,
                        const std::vector<std::string>& pareto_ids) {
    std::vector<const SampleRecord*> ok;
    for (const SampleRecord& record : records) {
        if (record.status == SampleStatus::Ok && record.time_s && record.power_w) {
            ok.push_back(&record);
        }
    }
    if (ok.empty()) {
        throw InsufficientDataError("no records with time and power to plot");
    }
    double t_lo = *ok.front()->time_s;
    double t_hi = t_lo;
    double p_lo = *ok.front()->power_w;
    double p_hi = p_lo;
    for (const SampleRecord* r : ok) {
        t_lo = std::min(t_lo, *r->time_s);
        t_hi = std::max(t_hi, *r->time_s);
        p_lo = std::min(p_lo, *r->power_w);
        p_hi = std::max(p_hi, *r->power_w);
    }
    if (t_hi == t_lo) {
        t_hi = t_lo + 1.0;
    }
    if (p_hi == p_lo) {
        p_hi = p_lo + 1.0;
    }
    // pad ranges a little so edge points do not sit on the frame
    const double t_pad = 0.05 * (t_hi - t_lo);
    const double p_pad = 0.05 * (p_hi - p_lo);
    t_lo -= t_pad;
    t_hi += t_pad;
    p_lo -= p_pad;
    p_hi += p_pad;

    constexpr double kWidth = 800.0;
    constexpr double kHeight = 560.0;
    constexpr double kLeft = 70.0;
    constexpr double kRight = 20.0;
    constexpr double kTop = 30.0;
    constexpr double kBottom = 55.0;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    const auto sx = [&](double t) { return kLeft + (t - t_lo) / (t_hi - t_lo) * plot_w; };
    const auto sy = [&](double p) { return kTop + (p_hi - p) / (p_hi - p_lo) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

    const double t_step = nice_tick_step(t_lo, t_hi);
    for (double t = std::ceil(t_lo / t_step) * t_step; t <= t_hi + 1e-12; t += t_step) {
        const double x = sx(t);
        svg << "<line x1=\"" << x << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << x
            << "\" y2=\"" << kTop + plot_h + 6 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << x << "\" y=\"" << kTop + plot_h + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">" << trim_number(t) << "</text>\n";
    }
    const double p_step = nice_tick_step(p_lo, p_hi);
    for (double p = std::ceil(p_lo / p_step) * p_step; p <= p_hi + 1e-12; p += p_step) {
        const double y = sy(p);
        svg << "<line x1=\"" << kLeft - 6 << "\" y1=\"" << y << "\" x2=\"" << kLeft
            << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << kLeft - 10 << "\" y=\"" << y + 4
            << "\" font-size=\"12\" text-anchor=\"end\">" << trim_number(p) << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
        << "\" font-size=\"14\" text-anchor=\"middle\">time_s</text>\n";
    svg << "<text x=\"18\" y=\"" << kTop + plot_h / 2
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << kTop + plot_h / 2 << ")\">power_w</text>\n";

    for (const SampleRecord* r : ok) {
        const bool on_front =
            std::find(pareto_ids.begin(), pareto_ids.end(), r->sample_id) != pareto_ids.end();
        svg << "<circle cx=\"" << sx(*r->time_s) << "\" cy=\"" << sy(*r->power_w) << "\" r=\""
            << (on_front ? 4 : 3) << "\" fill=\"" << (on_front ? "#d62728" : "#7f7f7f")
            << "\" fill-opacity=\"0.8\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace jexplore
