#include "aad/features.hpp"

#include "aad/error.hpp"

#include <Eigen/Dense>
#include <omp.h>

#include <algorithm>
#include <cmath>

namespace aad::features {

namespace {

constexpr std::size_t kBlockRows = 4096;
constexpr double kRankTolerance = 1e-9;

}  // namespace

PcaModel pca_fit(std::span<const TimeSeries* const> frames, std::size_t n_components) {
    if (frames.empty()) throw ValidationError("pca_fit: no embedding series");
    const std::size_t D = frames.front()->channels();
    std::size_t N = 0;
    for (const auto* f : frames) {
        if (f->channels() != D) throw ValidationError("pca_fit: embedding dimensionality differs across series");
        N += f->samples();
    }
    if (N < n_components + 1)
        throw ValidationError("pca_fit: need at least " + std::to_string(n_components + 1) + " frames, got " +
                              std::to_string(N));

    // Pool rows (row-major N x D, double).
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X(N, D);
    std::size_t r0 = 0;
    for (const auto* f : frames) {
        const auto data = f->matrix.data();
        for (std::size_t i = 0; i < data.size(); ++i) X.data()[r0 * D + i] = data[i];
        r0 += f->samples();
    }
    const Eigen::RowVectorXd mean = X.colwise().mean();
    X.rowwise() -= mean;

    // Covariance as a merge of per-block Gram matrices.
    const std::size_t n_blocks = (N + kBlockRows - 1) / kBlockRows;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(D, D);
#pragma omp parallel
    {
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(D, D);
#pragma omp for schedule(dynamic, 1)
        for (long long b = 0; b < static_cast<long long>(n_blocks); ++b) {
            const auto begin = static_cast<Eigen::Index>(static_cast<std::size_t>(b) * kBlockRows);
            const auto rows = static_cast<Eigen::Index>(std::min(kBlockRows, N - static_cast<std::size_t>(begin)));
            local.selfadjointView<Eigen::Lower>().rankUpdate(X.middleRows(begin, rows).transpose());
        }
#pragma omp critical
        cov += local;
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(N);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError("pca_fit: eigendecomposition failed");
    const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
    const double leading = std::max(values(values.size() - 1), 0.0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (values(i) > kRankTolerance * leading && leading > 0) ++rank;
    if (rank < n_components)
        throw DegenerateRankError("pca_fit: data rank " + std::to_string(rank) + " is below the " +
                                      std::to_string(n_components) + " requested components",
                                  rank, leading);

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + D);
    for (std::size_t k = 0; k < n_components; ++k) {
        const Eigen::Index col = static_cast<Eigen::Index>(D - 1 - k);
        Eigen::VectorXd v = eig.eigenvectors().col(col);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        model.components.emplace_back(v.data(), v.data() + D);
        model.explained_variance.push_back(std::max(values(col), 0.0));
    }
    return model;
}

PcaModel pca_fit(std::span<const TimeSeries> frames, std::size_t n_components) {
    std::vector<const TimeSeries*> ptrs;
    for (const auto& f : frames) ptrs.push_back(&f);
    return pca_fit(std::span<const TimeSeries* const>(ptrs), n_components);
}

TimeSeries pca_apply(const TimeSeries& x, const PcaModel& model) {
    const std::size_t D = model.input_dims();
    if (x.channels() != D)
        throw ValidationError("pca_apply: series has " + std::to_string(x.channels()) + " dims, model expects " +
                              std::to_string(D));
    const std::size_t K = model.n_components();
    const std::size_t T = x.samples();
    MatrixF32 out(T, K);
#pragma omp parallel
    {
        std::vector<double> centered(D);
#pragma omp for schedule(static)
        for (long long t = 0; t < static_cast<long long>(T); ++t) {
            const auto row = x.matrix.row(static_cast<std::size_t>(t));
            for (std::size_t d = 0; d < D; ++d) centered[d] = row[d] - model.mean[d];
            for (std::size_t k = 0; k < K; ++k) {
                double acc = 0.0;
                const auto& comp = model.components[k];
                for (std::size_t d = 0; d < D; ++d) acc += comp[d] * centered[d];
                out(static_cast<std::size_t>(t), k) = static_cast<float>(acc);
            }
        }
    }
    return TimeSeries(std::move(out), x.sample_rate_hz);
}

void save_pca_model(const PcaModel& model, const std::filesystem::path& prefix) {
    const std::size_t D = model.input_dims(), K = model.n_components();
    MatrixF32 mean(1, D), comps(K, D), var(1, K);
    for (std::size_t d = 0; d < D; ++d) mean(0, d) = static_cast<float>(model.mean[d]);
    for (std::size_t k = 0; k < K; ++k) {
        var(0, k) = static_cast<float>(model.explained_variance[k]);
        for (std::size_t d = 0; d < D; ++d) comps(k, d) = static_cast<float>(model.components[k][d]);
    }
    write_matrix_file(mean, prefix.string() + ".mean.aadm");
    write_matrix_file(comps, prefix.string() + ".components.aadm");
    write_matrix_file(var, prefix.string() + ".variance.aadm");
}

PcaModel load_pca_model(const std::filesystem::path& prefix) {
    const auto mean = read_matrix_file(prefix.string() + ".mean.aadm");
    const auto comps = read_matrix_file(prefix.string() + ".components.aadm");
    const auto var = read_matrix_file(prefix.string() + ".variance.aadm");
    if (mean.rows() != 1 || comps.cols() != mean.cols() || var.rows() != 1 || var.cols() != comps.rows())
        throw ValidationError("PCA model files at " + prefix.string() + " have inconsistent shapes");
    PcaModel m;
    m.mean.assign(mean.data().begin(), mean.data().end());
    for (std::size_t k = 0; k < comps.rows(); ++k) {
        const auto row = comps.row(k);
        m.components.emplace_back(row.begin(), row.end());
        m.explained_variance.push_back(var(0, k));
    }
    return m;
}

}  // namespace aad::features
