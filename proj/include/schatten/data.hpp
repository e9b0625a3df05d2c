#pragma once

// Synthetic low-rank instances, observation sampling, and ratings ingestion.

#include "schatten/core.hpp"

#include <charconv>
#include <cstdint>
#include <numeric>
#include <random>
#include <string_view>
#include <unordered_map>

namespace schatten {

/// X0 = P Q^T with P (m x r), Q (n x r) i.i.d. standard normal.
inline DenseMatrix gen_low_rank(Index m, Index n, Index r, std::uint64_t seed) {
    if (m < 0 || n < 0 || r < 0 || r > std::min(m, n))
        throw std::invalid_argument("gen_low_rank: rank " + std::to_string(r) +
                                    " out of range for " + dims_string(m, n));
    if (r == 0)
        return DenseMatrix::Zero(m, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseMatrix p(m, r), q(n, r);
    for (Index i = 0; i < p.size(); ++i)
        p.data()[i] = normal(rng);
    for (Index i = 0; i < q.size(); ++i)
        q.data()[i] = normal(rng);
    return p * q.transpose();
}

/// round-half-up(sr * m * n)
inline Index observation_count(Index m, Index n, double sr) {
    return static_cast<Index>(std::floor(sr * static_cast<double>(m) * static_cast<double>(n) + 0.5));
}

/// `count` distinct cells drawn uniformly without replacement (partial
/// Fisher-Yates over the m*n linear indices), returned in row-major order.
inline std::vector<std::pair<Index, Index>> sample_cells(Index m, Index n, Index count,
                                                         std::mt19937_64 &rng) {
    const Index total = m * n;
    if (count < 0 || count > total)
        throw std::invalid_argument("sample_cells: count out of range");
    std::vector<Index> cells(static_cast<std::size_t>(total));
    std::iota(cells.begin(), cells.end(), Index{0});
    for (Index i = 0; i < count; ++i) {
        std::uniform_int_distribution<Index> pick(i, total - 1);
        std::swap(cells[static_cast<std::size_t>(i)], cells[static_cast<std::size_t>(pick(rng))]);
    }
    cells.resize(static_cast<std::size_t>(count));
    std::sort(cells.begin(), cells.end());
    std::vector<std::pair<Index, Index>> out;
    out.reserve(cells.size());
    for (Index c : cells)
        out.emplace_back(c / n, c % n);
    return out;
}

/// Observations b = P_Omega(X0 + nf * Theta), Theta i.i.d. standard normal on
/// the whole host matrix, Omega uniform without replacement.
inline ObservationSet gen_noisy_observations(const DenseMatrix &x0, double sr, double nf,
                                             std::uint64_t seed) {
    if (!(sr > 0.0 && sr <= 1.0))
        throw std::invalid_argument("gen_noisy_observations: sr must lie in (0, 1]");
    if (!(nf >= 0.0))
        throw std::invalid_argument("gen_noisy_observations: nf must be non-negative");
    const Index m = x0.rows(), n = x0.cols();
    std::mt19937_64 rng(seed);
    const auto cells = sample_cells(m, n, observation_count(m, n, sr), rng);
    DenseMatrix noisy = x0;
    if (nf > 0.0) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index i = 0; i < noisy.size(); ++i)
            noisy.data()[i] += nf * normal(rng);
    }
    std::vector<Entry> entries;
    entries.reserve(cells.size());
    for (auto [i, j] : cells)
        entries.push_back({i, j, noisy(i, j)});
    return ObservationSet(m, n, std::move(entries));
}

struct SyntheticInstance {
    DenseMatrix ground_truth;
    ObservationSet observations;
    double noise_factor = 0.0;
    double sampling_ratio = 1.0;
    Index true_rank = 0;
    std::uint64_t seed = 0;
};

/// Ground truth from `seed`, observations from a derived stream.
inline SyntheticInstance make_synthetic_mc(Index m, Index n, Index r, double sr, double nf,
                                           std::uint64_t seed) {
    SyntheticInstance inst;
    inst.ground_truth = gen_low_rank(m, n, r, seed);
    inst.observations = gen_noisy_observations(inst.ground_truth, sr, nf, seed ^ 0x9e3779b97f4a7c15ULL);
    inst.noise_factor = nf;
    inst.sampling_ratio = sr;
    inst.true_rank = r;
    inst.seed = seed;
    return inst;
}

/// Low-rank plus sparse spikes: D = X0 + S with S uniform +-magnitude on a
/// random fraction of cells.
struct SparseCorruption {
    DenseMatrix low_rank;
    DenseMatrix spikes;
    std::vector<bool> spike_mask; // row-major over the host matrix

    DenseMatrix observed() const { return low_rank + spikes; }
};

inline SparseCorruption gen_sparse_corruption(Index m, Index n, Index r, double fraction,
                                              double magnitude, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw std::invalid_argument("gen_sparse_corruption: fraction must lie in [0, 1]");
    SparseCorruption out;
    out.low_rank = gen_low_rank(m, n, r, seed);
    out.spikes = DenseMatrix::Zero(m, n);
    out.spike_mask.assign(static_cast<std::size_t>(m * n), false);
    std::mt19937_64 rng(seed ^ 0x51ed270b27a1f3c5ULL);
    const auto cells = sample_cells(m, n, observation_count(m, n, fraction), rng);
    std::uniform_real_distribution<double> spike(-magnitude, magnitude);
    for (auto [i, j] : cells) {
        out.spikes(i, j) = spike(rng);
        out.spike_mask[static_cast<std::size_t>(i * n + j)] = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ratings

enum class RatingsFormat { DoubleColon, Comma, Tab };

inline std::string_view separator(RatingsFormat f) {
    switch (f) {
    case RatingsFormat::DoubleColon:
        return "::";
    case RatingsFormat::Comma:
        return ",";
    case RatingsFormat::Tab:
        return "\t";
    }
    return ",";
}

struct RawRating {
    std::string user;
    std::string item;
    double rating = 0.0;

    bool operator==(const RawRating &) const = default;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, const std::string &detail, const std::string &source = {})
        : std::runtime_error((source.empty() ? "" : source + ": ") + "line " +
                             std::to_string(line) + ": " + detail),
          line_(line), detail_(detail) {}
    std::size_t line() const { return line_; }
    const std::string &detail() const { return detail_; }

  private:
    std::size_t line_;
    std::string detail_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line, std::string_view sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + sep.size();
    }
}

} // namespace detail

/// Parses "user<sep>item<sep>rating[<sep>timestamp]" lines; blank lines are
/// skipped and the timestamp is ignored.
inline std::vector<RawRating> parse_ratings(std::istream &in, RatingsFormat format) {
    std::vector<RawRating> out;
    std::string line;
    std::size_t lineno = 0;
    const std::string_view sep = separator(format);
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view body = detail::trim(line);
        if (body.empty())
            continue;
        const auto fields = detail::split(body, sep);
        if (fields.size() < 3 || fields.size() > 4)
            throw ParseError(lineno, "expected 3 or 4 fields, found " +
                                         std::to_string(fields.size()));
        const std::string_view user = detail::trim(fields[0]);
        const std::string_view item = detail::trim(fields[1]);
        const std::string_view rating = detail::trim(fields[2]);
        if (user.empty() || item.empty())
            throw ParseError(lineno, "empty user or item id");
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(rating.data(), rating.data() + rating.size(), value);
        if (ec != std::errc{} || ptr != rating.data() + rating.size() || !std::isfinite(value))
            throw ParseError(lineno, "bad rating value '" + std::string(rating) + "'");
        out.push_back({std::string(user), std::string(item), value});
    }
    if (out.empty())
        throw std::runtime_error("ratings input contains no ratings");
    return out;
}

inline std::vector<RawRating> load_ratings(const std::string &path, RatingsFormat format) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open ratings file: " + path);
    try {
        return parse_ratings(in, format);
    } catch (const ParseError &e) {
        throw ParseError(e.line(), e.detail(), path);
    }
}

struct RatingsDataset {
    Index num_users = 0;
    Index num_items = 0;
    ObservationSet train;
    ObservationSet test;
    std::vector<std::string> user_ids; // dense index -> raw id
    std::vector<std::string> item_ids;
    std::unordered_map<std::string, Index> user_index;
    std::unordered_map<std::string, Index> item_index;

    double train_mean() const {
        return train.empty() ? 0.0 : train.values().mean();
    }
    /// Whether a user / item has at least one training rating.
    std::vector<bool> users_in_train() const {
        std::vector<bool> seen(static_cast<std::size_t>(num_users), false);
        for (Index k = 0; k < train.size(); ++k)
            seen[static_cast<std::size_t>(train.row(k))] = true;
        return seen;
    }
    std::vector<bool> items_in_train() const {
        std::vector<bool> seen(static_cast<std::size_t>(num_items), false);
        for (Index k = 0; k < train.size(); ++k)
            seen[static_cast<std::size_t>(train.col(k))] = true;
        return seen;
    }
};

/// Seeded uniform shuffle; the first ceil(fraction * count) ratings (clamped
/// so both sides are non-empty) form the training set. Dense indices follow
/// first appearance in the input order.
inline RatingsDataset split_ratings(const std::vector<RawRating> &ratings, double train_fraction,
                                    std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split_ratings: train_fraction must lie in (0, 1)");
    if (ratings.size() < 2)
        throw std::invalid_argument("split_ratings: need at least 2 ratings");

    RatingsDataset ds;
    std::vector<std::pair<Index, Index>> cell(ratings.size());
    for (std::size_t k = 0; k < ratings.size(); ++k) {
        const RawRating &r = ratings[k];
        auto [uit, unew] = ds.user_index.try_emplace(r.user, static_cast<Index>(ds.user_ids.size()));
        if (unew)
            ds.user_ids.push_back(r.user);
        auto [iit, inew] = ds.item_index.try_emplace(r.item, static_cast<Index>(ds.item_ids.size()));
        if (inew)
            ds.item_ids.push_back(r.item);
        cell[k] = {uit->second, iit->second};
    }
    ds.num_users = static_cast<Index>(ds.user_ids.size());
    ds.num_items = static_cast<Index>(ds.item_ids.size());

    std::vector<std::size_t> order(ratings.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i);
        std::swap(order[i], order[pick(rng)]);
    }
    auto n_train = static_cast<std::size_t>(
        std::ceil(train_fraction * static_cast<double>(ratings.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, ratings.size() - 1);

    std::vector<Entry> train, test;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t src = order[k];
        const Entry e{cell[src].first, cell[src].second, ratings[src].rating};
        (k < n_train ? train : test).push_back(e);
    }
    try {
        std::vector<Entry> all = train;
        all.insert(all.end(), test.begin(), test.end());
        ObservationSet(ds.num_users, ds.num_items, std::move(all));
    } catch (const std::invalid_argument &) {
        throw std::invalid_argument("split_ratings: duplicate (user, item) pair in input");
    }
    ds.train = ObservationSet(ds.num_users, ds.num_items, std::move(train));
    ds.test = ObservationSet(ds.num_users, ds.num_items, std::move(test));
    return ds;
}

/// Predictions on the test cells: completed-matrix value plus the train
/// mean, or the train mean alone for users / items absent from training.
/// `centered` is the completed matrix for recentred training data.
inline Vector predict_test(const RatingsDataset &ds, const DenseMatrix &centered) {
    const double mean = ds.train_mean();
    const auto users = ds.users_in_train();
    const auto items = ds.items_in_train();
    Vector out(ds.test.size());
    for (Index k = 0; k < ds.test.size(); ++k) {
        const Index u = ds.test.row(k), i = ds.test.col(k);
        const bool warm = users[static_cast<std::size_t>(u)] && items[static_cast<std::size_t>(i)];
        out(k) = warm ? mean + centered(u, i) : mean;
    }
    return out;
}

/// Training observations minus the training mean.
inline ObservationSet centered_train(const RatingsDataset &ds) {
    const double mean = ds.train_mean();
    return ds.train.with_values(ds.train.values().array() - mean);
}

} // namespace schatten
