#include "qka/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "qka/circuits.hpp"
#include "qka/errors.hpp"
#include "qka/rng.hpp"

namespace qka {

namespace {

using cvec = std::vector<std::complex<double>>;

// Column-major dense complex matrix, only used for the labeling unitary.
struct CMat {
    std::size_t dim = 0;
    cvec data; // data[c * dim + r]

    explicit CMat(std::size_t d) : dim(d), data(d * d) {}
    std::complex<double>& at(std::size_t r, std::size_t c) { return data[c * dim + r]; }
    const std::complex<double>& at(std::size_t r, std::size_t c) const {
        return data[c * dim + r];
    }
};

// Haar-distributed unitary: QR of a complex Gaussian matrix via modified
// Gram-Schmidt (positive real R diagonal).
CMat haar_unitary(std::size_t dim, Rng& rng) {
    CMat m(dim);
    for (auto& z : m.data) z = {rng.normal(), rng.normal()};
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t prev = 0; prev < c; ++prev) {
            std::complex<double> proj{0.0, 0.0};
            for (std::size_t r = 0; r < dim; ++r) proj += std::conj(m.at(r, prev)) * m.at(r, c);
            for (std::size_t r = 0; r < dim; ++r) m.at(r, c) -= proj * m.at(r, prev);
        }
        double norm = 0.0;
        for (std::size_t r = 0; r < dim; ++r) norm += std::norm(m.at(r, c));
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw NumericError("degenerate Gaussian draw in haar_unitary");
        for (std::size_t r = 0; r < dim; ++r) m.at(r, c) /= norm;
    }
    return m;
}

cvec mat_vec(const CMat& m, std::span<const std::complex<double>> v) {
    cvec out(m.dim, {0.0, 0.0});
    for (std::size_t c = 0; c < m.dim; ++c) {
        const auto vc = v[c];
        for (std::size_t r = 0; r < m.dim; ++r) out[r] += m.at(r, c) * vc;
    }
    return out;
}

// <w| P |w> for the full Z-parity observable P = Z⊗...⊗Z.
double parity_expectation(const cvec& w) {
    double e = 0.0;
    for (std::size_t b = 0; b < w.size(); ++b) {
        const double sign = (std::popcount(b) % 2 == 0) ? 1.0 : -1.0;
        e += sign * std::norm(w[b]);
    }
    return e;
}

FeatureMapSpec generator_map(const HavlicekParams& params) {
    FeatureMapSpec spec;
    spec.kind = FeatureMapKind::ZZ2ndOrder;
    spec.n_qubits = params.n_qubits;
    spec.reps = params.feature_map_reps;
    return spec;
}

double expectation_for(const HavlicekParams& params, const CMat& v, std::span<const double> x) {
    const auto circuit = build_feature_map(generator_map(params), x);
    const auto state = run_circuit(circuit);
    return parity_expectation(mat_vec(v, state.amplitudes()));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void validate_dataset(const Dataset& ds) {
    if (ds.size() == 0) throw InvalidArgument("dataset is empty");
    if (ds.labels.size() != ds.size()) throw InvalidArgument("label count mismatch");
    bool pos = false;
    bool neg = false;
    for (int y : ds.labels) {
        if (y == 1) pos = true;
        else if (y == -1) neg = true;
        else throw InvalidArgument("labels must be +1 or -1");
    }
    if (!pos || !neg) throw InvalidArgument("dataset must contain both classes");
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (double v : ds.features.row(r)) {
            if (!std::isfinite(v)) throw InvalidArgument("non-finite feature value");
        }
    }
}

double havlicek_expectation(const HavlicekParams& params, std::span<const double> x) {
    Rng rng(derive_seed(params.seed, fnv1a("havlicek-unitary")));
    const CMat v = haar_unitary(std::size_t{1} << params.n_qubits, rng);
    return expectation_for(params, v, x);
}

std::pair<Dataset, Dataset> generate_havlicek(const HavlicekParams& params) {
    if (!(params.gap > 0.0 && params.gap < 1.0)) throw InvalidArgument("gap must be in (0, 1)");
    if (params.m_train < 2 || params.m_test < 2) throw InvalidArgument("splits need >= 2 points");
    if (params.n_qubits < 1 || params.n_qubits > 8) {
        throw InvalidArgument("generator supports 1..8 qubits");
    }

    Rng unitary_rng(derive_seed(params.seed, fnv1a("havlicek-unitary")));
    const CMat v = haar_unitary(std::size_t{1} << params.n_qubits, unitary_rng);
    Rng sample_rng(derive_seed(params.seed, fnv1a("havlicek-samples")));

    const std::size_t d = static_cast<std::size_t>(params.n_qubits);
    // Balanced within one sample per split.
    const std::size_t train_pos = params.m_train / 2;
    const std::size_t train_neg = params.m_train - train_pos;
    const std::size_t test_pos = params.m_test / 2;
    const std::size_t test_neg = params.m_test - test_pos;
    const std::size_t want_pos = train_pos + test_pos;
    const std::size_t want_neg = train_neg + test_neg;

    std::vector<std::vector<double>> pos_points;
    std::vector<std::vector<double>> neg_points;
    pos_points.reserve(want_pos);
    neg_points.reserve(want_neg);

    std::vector<double> x(d, 0.0);
    std::size_t attempts = 0;
    while (pos_points.size() < want_pos || neg_points.size() < want_neg) {
        if (++attempts > params.rejection_budget) {
            throw NumericError("rejection budget exceeded while generating dataset");
        }
        for (auto& xi : x) xi = sample_rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double e = expectation_for(params, v, x);
        if (std::abs(e) < params.gap) continue;
        if (e > 0.0) {
            if (pos_points.size() < want_pos) pos_points.push_back(x);
        } else {
            if (neg_points.size() < want_neg) neg_points.push_back(x);
        }
    }

    auto assemble = [&](std::size_t pos_from, std::size_t pos_count, std::size_t neg_from,
                        std::size_t neg_count, const std::string& name) {
        Dataset ds;
        ds.features = Matrix(pos_count + neg_count, d);
        ds.labels.resize(pos_count + neg_count);
        ds.name = name;
        ds.seed = params.seed;
        std::size_t row = 0;
        for (std::size_t i = 0; i < pos_count; ++i, ++row) {
            for (std::size_t c = 0; c < d; ++c) ds.features(row, c) = pos_points[pos_from + i][c];
            ds.labels[row] = 1;
        }
        for (std::size_t i = 0; i < neg_count; ++i, ++row) {
            for (std::size_t c = 0; c < d; ++c) ds.features(row, c) = neg_points[neg_from + i][c];
            ds.labels[row] = -1;
        }
        // Interleaving order is irrelevant downstream; keep rows shuffled so
        // contiguous subsets are class-mixed.
        std::vector<std::size_t> perm(ds.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        Rng perm_rng(derive_seed(params.seed, fnv1a(name)));
        perm_rng.shuffle(perm);
        Dataset shuffled = ds;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            for (std::size_t c = 0; c < d; ++c) shuffled.features(i, c) = ds.features(perm[i], c);
            shuffled.labels[i] = ds.labels[perm[i]];
        }
        return shuffled;
    };

    Dataset train = assemble(0, train_pos, 0, train_neg, "train");
    Dataset test = assemble(train_pos, test_pos, train_neg, test_neg, "test");
    validate_dataset(train);
    validate_dataset(test);
    return {std::move(train), std::move(test)};
}

Dataset load_embeddings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2) throw ParseError(path + ": header needs features plus a label column");
    if (header.back() != "label") throw ParseError(path + ": last header column must be 'label'");
    const std::size_t d = header.size() - 1;

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
            }
            if (used != cell.size()) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
            }
            row.push_back(v);
        }
        if (row.size() != d + 1) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(d + 1) + " columns, got " + std::to_string(row.size()));
        }
        const double label = row.back();
        if (label != 1.0 && label != -1.0) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": label must be +1 or -1");
        }
        for (std::size_t c = 0; c < d; ++c) {
            if (!std::isfinite(row[c])) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite feature");
            }
            values.push_back(row[c]);
        }
        labels.push_back(label > 0 ? 1 : -1);
    }
    if (labels.empty()) throw ParseError(path + ": no data rows");

    Dataset ds;
    ds.features = Matrix(labels.size(), d);
    std::copy(values.begin(), values.end(), ds.features.data());
    ds.labels = std::move(labels);
    ds.name = std::filesystem::path(path).stem().string();
    validate_dataset(ds);
    return ds;
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    for (std::size_t c = 0; c < ds.dimension(); ++c) out << 'f' << c << ',';
    out << "label\n";
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (double v : ds.features.row(r)) out << format_double(v) << ',';
        out << ds.labels[r] << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

void generate_havlicek_files(const HavlicekParams& params, const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto [train, test] = generate_havlicek(params);
    const auto base = std::filesystem::path(dir);
    save_dataset_csv(train, (base / "train.csv").string());
    save_dataset_csv(test, (base / "test.csv").string());

    nlohmann::json manifest;
    manifest["generator"] = "havlicek";
    manifest["n_qubits"] = params.n_qubits;
    manifest["m_train"] = params.m_train;
    manifest["m_test"] = params.m_test;
    manifest["gap"] = params.gap;
    manifest["seed"] = params.seed;
    manifest["feature_map"] = "zz";
    manifest["feature_map_reps"] = params.feature_map_reps;
    manifest["labeling"] = "sign of Haar-random-frame Z-parity expectation, |e| >= gap";
    manifest["feature_range"] = "[0, 2*pi)";
    manifest["files"] = {"train.csv", "test.csv"};

    std::ofstream out(base / "manifest.json");
    if (!out) throw IoError("cannot write manifest under " + dir);
    out << manifest.dump(2) << "\n";
}

std::vector<std::vector<std::size_t>> FoldPlan::folds() const {
    std::vector<std::vector<std::size_t>> out(n_folds);
    for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
    return out;
}

std::vector<std::size_t> stratified_sample(std::span<const int> labels, double fraction,
                                           std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("fraction must be in (0, 1)");
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) pos.push_back(i);
        else if (labels[i] == -1) neg.push_back(i);
        else throw InvalidArgument("labels must be +1 or -1");
    }
    if (pos.empty() || neg.empty()) throw InvalidArgument("stratified_sample needs both classes");

    Rng rng(derive_seed(seed, fnv1a("stratified-sample")));
    rng.shuffle(pos);
    rng.shuffle(neg);
    const auto take = [&](std::size_t available) {
        return std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(static_cast<double>(available) * fraction)));
    };
    std::vector<std::size_t> rows(pos.begin(), pos.begin() + take(pos.size()));
    rows.insert(rows.end(), neg.begin(), neg.begin() + take(neg.size()));
    std::sort(rows.begin(), rows.end());
    return rows;
}

FoldPlan stratified_folds(const Dataset& ds, std::size_t n_folds, std::uint64_t seed) {
    validate_dataset(ds);
    if (n_folds < 2) throw InvalidArgument("need at least 2 folds");
    if (ds.size() < n_folds) throw InvalidArgument("fewer samples than folds");

    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        (ds.labels[i] == 1 ? pos : neg).push_back(i);
    }
    const std::size_t min_class = std::min(pos.size(), neg.size());
    if (min_class < 2) throw InvalidArgument("too few samples in the minority class");
    if (min_class < n_folds) n_folds = min_class;

    Rng rng(derive_seed(seed, fnv1a("folds")));
    rng.shuffle(pos);
    rng.shuffle(neg);

    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.assignment.assign(ds.size(), 0);
    std::size_t next = 0;
    for (std::size_t i = 0; i < pos.size(); ++i, ++next) plan.assignment[pos[i]] = next % n_folds;
    for (std::size_t i = 0; i < neg.size(); ++i, ++next) plan.assignment[neg[i]] = next % n_folds;
    return plan;
}

} // namespace qka
