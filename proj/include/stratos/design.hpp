// Fixed-effect design construction for the top-performer models, including
// the natural cubic spline basis used by the robustness variants.
#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "stratos/core.hpp"
#include "stratos/panel.hpp"

namespace stratos::design {

enum class Response { top20, top10, top5, top1 };

double response_quantile(Response r);           // top10 -> 0.90 etc.
std::string response_name(Response r);          // "top10"
Response parse_response(std::string_view s);

enum class ProductivityForm { quadratic, spline };

struct DesignSpec {
  Response response = Response::top10;
  ProductivityForm form = ProductivityForm::quadratic;
  int spline_df = 3;
  // The quantity x quality interaction belongs to the quadratic
  // specification; the spline variant models quantity flexibly on its own.
  bool interaction() const { return form == ProductivityForm::quadratic; }
};

struct DesignMatrix {
  Eigen::MatrixXd X;                 // n x p, first column is the intercept
  Eigen::VectorXd y;                 // 0/1 response
  std::vector<int> cluster;          // author index per row, 0..n_clusters-1
  int n_clusters = 0;
  std::vector<std::string> terms;    // column names, Table-6 order
  // term label -> column indices, for the grouped collinearity diagnostics
  std::vector<std::pair<std::string, std::vector<int>>> term_groups;
};

/// Columns in the fixed reporting order: intercept, period dummies
/// (ref 1992-1997), discipline dummies (ref AGRI), then the covariate block.
/// Throws degenerate_data_error naming the column when a level is empty or
/// the matrix is rank deficient.
DesignMatrix build_design(const panel::CenteredPanel& panel,
                          std::span<const char> labels, const DesignSpec& spec);

/// Natural cubic spline basis: df columns, boundary knots at min/max of x,
/// df-1 interior knots at equally spaced quantiles; linear beyond the
/// boundary knots.
Eigen::MatrixXd natural_spline_basis(const Eigen::VectorXd& x, int df);

/// The knot sequence used by natural_spline_basis (boundary knots included).
std::vector<double> natural_spline_knots(const Eigen::VectorXd& x, int df);

}  // namespace stratos::design
