#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "quotlab/corpus.hpp"
#include "quotlab/errors.hpp"

namespace quotlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One quote's regression row: nonobjective indicator, outlet, outlet bias
// category, speaker party, month index.
struct RegressionObservation {
    double y = 0.0;
    std::string outlet;
    Bias bias = Bias::Unknown;
    Party party = Party::Unknown;
    int t = 0;
};

// Column-oriented observations with outlets interned to dense ids in first
// appearance order.
class ObservationSet {
public:
    void add(double y, std::string_view outlet, Bias bias, Party party, int t);
    void add(const RegressionObservation& o) { add(o.y, o.outlet, o.bias, o.party, o.t); }

    size_t size() const { return y_.size(); }
    std::span<const double> y() const { return y_; }
    std::span<const int> outlet() const { return outlet_; }
    std::span<const Bias> bias() const { return bias_; }
    std::span<const Party> party() const { return party_; }
    std::span<const int> t() const { return t_; }
    const std::vector<std::string>& outlet_names() const { return outlet_names_; }
    int n_outlets() const { return static_cast<int>(outlet_names_.size()); }

private:
    std::vector<double> y_;
    std::vector<int> outlet_;
    std::vector<Bias> bias_;
    std::vector<Party> party_;
    std::vector<int> t_;
    std::vector<std::string> outlet_names_;
    std::unordered_map<std::string, int> outlet_ids_;
};

enum class ModelForm : char {
    TrendByCategory,           // outlet FE + per-category time trend
    CategoryPartyInteraction,  // category x party cells, no outlet FE
    TrendByCategoryParty,      // outlet FE + per-(category,party) time trend
    Pooled                     // single overall trend
};

std::string_view to_string(ModelForm f);
ModelForm model_form_from_string(std::string_view s);

struct ModelSpec {
    ModelForm form = ModelForm::Pooled;
    bool absorb_outlet_fe = true;
    // clustering is always on the outlet

    static ModelSpec trend_by_category();        // absorb required
    static ModelSpec category_party();           // no outlet FE, as specified
    static ModelSpec trend_by_category_party();  // absorb required
    static ModelSpec pooled(bool absorb = true);

    void validate() const;  // throws ConfigError when form and FE flag disagree
};

// Design matrix ready for the solver. When FE are absorbed, X and y are
// within-outlet demeaned and columns constant within outlets have already
// been removed (their names in `dropped`).
struct Design {
    Matrix X;
    Vector y;
    std::vector<int> cluster;  // outlet id per row
    std::vector<std::string> names;
    std::vector<std::string> dropped;
    int n_clusters = 0;
    int n_absorbed = 0;  // outlet intercepts folded away by demeaning
};

Design build_design(const ObservationSet& obs, const ModelSpec& spec);

struct FitResult {
    std::vector<std::string> coef_names;
    Vector beta;   // natural (per-quote probability) scale
    Matrix vcov;   // cluster-robust, filled by the caller of cluster_cov
    long n_obs = 0;
    long n_params = 0;  // estimated columns + absorbed group intercepts
    long n_clusters = 0;
    std::vector<std::string> dropped_columns;
    double rss = 0.0;
    double fitted_min = 0.0, fitted_max = 0.0;

    int coef_index(std::string_view name) const;  // -1 when absent
};

// Least squares by column-pivoted QR. Columns whose pivoted diagonal falls
// below 1e-10 of the leading one are dropped and reported. Throws RankZero
// when nothing survives.
FitResult fit_ols(const Matrix& X, const Vector& y, std::span<const std::string> names);

// CR1 cluster sandwich: c * (X'X)^-1 (sum_g X_g' e_g e_g' X_g) (X'X)^-1 with
// c = [G/(G-1)] * [(N-1)/(N-K)]. `n_params` is K; pass the FE-inclusive count
// when group intercepts were absorbed. Throws SingleCluster.
Matrix cluster_cov(const Matrix& X, const Vector& residuals, std::span<const int> cluster_ids,
                   long n_params);

struct Contrast {
    std::map<std::string, double> weights;
    double estimate = 0.0;
    double se = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    long df = 0;
};

// w'beta with se sqrt(w'Vw) and a two-sided t(G-1) p-value. Throws
// UnknownCoefficient for weight names outside the fit.
Contrast contrast(const FitResult& fit, const std::map<std::string, double>& weights);

struct NamedContrast {
    std::string name;
    Contrast value;
};

// A fitted model plus its standard contrast family. Trend contrasts are
// scaled to percentage points per year (monthly coefficient x 1200), level
// contrasts to percentage points (x100); scaling happens through the
// contrast weights, so t statistics are unaffected.
struct ModelFit {
    ModelSpec spec;
    FitResult fit;
    std::vector<NamedContrast> contrasts;
};

ModelFit fit_model(const ObservationSet& obs, const ModelSpec& spec);

} // namespace quotlab
