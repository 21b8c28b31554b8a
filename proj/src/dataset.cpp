#include "caero/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "caero/error.hpp"

namespace caero {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\"");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\"");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, const std::string& source, std::size_t row, std::size_t col) {
    const std::string s = trim(raw);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        std::ostringstream os;
        os << source << ": row " << row << ", column " << col + 1 << ": not a finite number: '" << s << "'";
        throw IngestError(os.str());
    }
    return v;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw IngestError(source + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 2) throw IngestError(source + ": header needs an id column and at least one sample column");
    const bool has_sigma = header.size() > 1 && trim(header[1]) == "sigma_hat";
    const std::size_t first_sample = has_sigma ? 2 : 1;
    const std::size_t width = header.size();
    Dataset d;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != width) {
            std::ostringstream os;
            os << source << ": row " << row << " has " << cells.size() << " fields, expected " << width;
            throw IngestError(os.str());
        }
        d.ids.push_back(trim(cells[0]));
        double sigma = 1.0;
        if (has_sigma) {
            sigma = parse_number(cells[1], source, row, 1);
            if (!(sigma > 0.0)) {
                std::ostringstream os;
                os << source << ": row " << row << ": sigma_hat must be positive";
                throw IngestError(os.str());
            }
        }
        d.sigma_hat.push_back(sigma);
        std::vector<double> xs;
        xs.reserve(width - first_sample);
        for (std::size_t c = first_sample; c < width; ++c) xs.push_back(parse_number(cells[c], source, row, c));
        d.samples.push_back(std::move(xs));
        d.truth.push_back(-1);
    }
    if (d.ids.empty()) throw IngestError(source + ": no data rows");
    return d;
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open dataset " + path.string());
    return read_dataset_csv(in, path.string());
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    const std::size_t width = data.samples.empty() ? 0 : data.samples.front().size();
    out << "id,sigma_hat";
    for (std::size_t c = 0; c < width; ++c) out << ",s" << c + 1;
    out << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.ids[i] << ',' << data.sigma_hat[i];
        for (double x : data.samples[i]) out << ',' << x;
        out << '\n';
    }
}

Dataset synthesize_dataset(const SyntheticDatasetSpec& spec) {
    boost::random::mt19937_64 rng(spec.seed);
    boost::random::normal_distribution<double> std_normal(0.0, 1.0);
    boost::random::uniform_01<double> unif;
    Dataset d;
    for (std::size_t g = 0; g < spec.genes; ++g) {
        const double sigma = spec.sigma_median * std::exp(spec.sigma_spread * std_normal(rng));
        const double mu = 2.0 + 0.5 * std_normal(rng);
        const bool changed = unif(rng) < spec.fraction_changed;
        double shift = 0.0;
        if (changed) shift = (unif(rng) < 0.5 ? 1.0 : -1.0) * spec.log_fold_change * (1.0 + std::abs(std_normal(rng)));
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t k = 0; k < spec.normal_samples; ++k) {
            const double x = mu + sigma * std_normal(rng);
            sum += x;
            sum2 += x * x;
        }
        const double nn = static_cast<double>(spec.normal_samples);
        const double mean = sum / nn;
        const double sd = std::sqrt(std::max(1e-12, (sum2 - nn * mean * mean) / (nn - 1.0)));
        std::vector<double> tumor(spec.tumor_samples);
        for (auto& x : tumor) x = (mu + shift + sigma * std_normal(rng) - mean) / sd;
        d.ids.push_back("g" + std::to_string(g + 1));
        d.sigma_hat.push_back(sd);
        d.samples.push_back(std::move(tumor));
        // Only upward shifts are alternatives for the one-sided test.
        d.truth.push_back(shift > 0.0 ? Truth{0} : Truth{1});
    }
    return d;
}

void DatasetConfig::validate() const {
    if (prior_k == 0) throw ValidationError("prior_k must be at least 1");
    if (!(beta_slope > 0.0)) throw ValidationError("beta_slope must be positive");
    if (!(n_cap_exec >= 1.0)) throw ValidationError("n_cap_exec must be at least 1");
    if (permutations == 0) throw ValidationError("permutations must be positive");
    if (!(budget >= 0.0) || !(cost > 0.0)) throw ValidationError("budget and cost must be valid");
    if (!(alpha > 0.0 && alpha < 1.0) || !(eta > 0.0 && eta <= 1.0)) throw ValidationError("alpha or eta out of range");
}

PolicyConfig dataset_baseline_policy(const DatasetConfig&) {
    PolicyConfig p;
    p.name = "ero";
    p.scheme.kind = SchemeKind::relative;
    return p;
}

PolicyConfig dataset_cost_aware_policy(const DatasetConfig& config) {
    PolicyConfig p;
    p.name = "cost-aware";
    p.solver.init_rho = 0.9;
    p.solver.ante_prior_scale = 0.5;
    p.skip_above_n = config.n_cap_exec;
    return p;
}

NRule dataset_n_rule(const DatasetConfig& config, const PolicyConfig& policy) {
    if (policy.name == "cost-aware") return NRule{NRule::Kind::unbounded, 0.0};
    return NRule{NRule::Kind::fixed, config.n_cap_exec};
}

PreparedDataset prepare_dataset(const Dataset& data, const DatasetConfig& config) {
    config.validate();
    PreparedDataset p;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& xs = data.samples[i];
        if (xs.size() < config.prior_k + 1) {
            std::ostringstream os;
            os << "row " << data.ids[i] << " has " << xs.size() << " samples, needs at least " << config.prior_k + 1;
            throw IngestError(os.str());
        }
        const double s = data.sigma_hat[i];
        HypothesisSpec spec;
        spec.theta_bar = config.theta_bar / s;
        spec.sigma = 1.0;
        spec.cost = config.cost;
        double q = 0.5;
        if (config.prior_k > 0) {
            q = estimate_prior_logistic(std::span<const double>(xs.data(), config.prior_k), config.beta_slope,
                                        config.x0 / s);
        }
        // Keep the estimate usable by the validators; the solver's prior bounds decide skips.
        spec.q = std::clamp(q, 1e-12, 1.0 - 1e-12);
        p.specs.push_back(spec);
        p.testing.emplace_back(xs.begin() + static_cast<std::ptrdiff_t>(config.prior_k), xs.end());
        p.truth.push_back(i < data.truth.size() ? data.truth[i] : Truth{-1});
        p.ids.push_back(data.ids[i]);
    }
    return p;
}

std::vector<std::size_t> permutation(std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = i;
    boost::random::mt19937_64 rng(seed);
    for (std::size_t i = count; i > 1; --i) {
        boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(idx[i - 1], idx[pick(rng)]);
    }
    return idx;
}

namespace {

class MatrixSource : public SampleSource {
public:
    MatrixSource(const PreparedDataset& d, const std::vector<std::size_t>& order) : d_(d), order_(order) {}
    std::size_t available(std::size_t j) const override { return d_.testing[order_[j]].size(); }
    std::vector<double> draw(std::size_t j, std::size_t n) const override {
        const auto& row = d_.testing[order_[j]];
        return {row.begin(), row.begin() + static_cast<std::ptrdiff_t>(n)};
    }

private:
    const PreparedDataset& d_;
    const std::vector<std::size_t>& order_;
};

}  // namespace

AggregateReport run_dataset(const PreparedDataset& data, const DatasetConfig& config, const PolicyConfig& policy) {
    config.validate();
    const auto built = make_policy(policy, dataset_n_rule(config, policy));
    std::vector<IterationRecord> recs(config.permutations);
    parallel_for(config.permutations, config.threads, [&](std::size_t i) {
        const auto order = permutation(data.specs.size(), config.seed_base + i);
        std::vector<HypothesisSpec> specs;
        std::vector<Truth> truth;
        specs.reserve(order.size());
        truth.reserve(order.size());
        for (std::size_t k : order) {
            specs.push_back(data.specs[k]);
            truth.push_back(data.truth[k]);
        }
        const MatrixSource source(data, order);
        IterationRecord r = run_sequence(*built, specs, {}, truth, source,
                                         WealthState::init(config.alpha, config.eta, config.budget));
        r.iteration = i;
        recs[i] = r;
    });
    AggregateReport rep = aggregate(recs, config.eta);
    rep.label = built->name();
    return rep;
}

}  // namespace caero
