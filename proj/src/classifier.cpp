#include "zcam/classifier.hpp"

#include <algorithm>
#include <numeric>

#include "zcam/error.hpp"

namespace zcam::ml {

std::string_view kind_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Cart: return "cart";
    case ClassifierKind::RandomForest: return "rf";
    case ClassifierKind::ExtraTrees: return "et";
    case ClassifierKind::Gbt: return "gbt";
    case ClassifierKind::Knn: return "knn";
    case ClassifierKind::Gnb: return "gnb";
    case ClassifierKind::LinearSvm: return "lsvm";
  }
  return "?";
}

std::optional<ClassifierKind> parse_classifier_kind(std::string_view name) {
  for (auto k : kAllClassifierKinds)
    if (kind_name(k) == name) return k;
  return std::nullopt;
}

CartModel train_cart(const Matrix& x, std::span<const int> y, int n_classes, std::optional<std::size_t> max_depth,
                     std::size_t min_leaf, std::uint64_t seed) {
  TreeParams tp;
  tp.max_depth = max_depth;
  tp.min_leaf = min_leaf;
  tp.seed = seed;
  return {build_classification_tree({x}, y, n_classes, tp), n_classes};
}

Matrix predict_proba(const CartModel& model, const Matrix& x) {
  if (x.cols() != model.tree.n_features()) fail(Errc::DimensionMismatch, "cart input width");
  Matrix out(x.rows(), static_cast<std::size_t>(model.n_classes));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto hist = model.tree.predict(x.row(i));
    const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
    for (std::size_t k = 0; k < hist.size(); ++k) out(i, k) = total > 0 ? hist[k] / total : 0.0;
  }
  return out;
}

EncodedLabels encode_labels(std::span<const std::string> labels) {
  EncodedLabels e;
  e.classes.assign(labels.begin(), labels.end());
  std::sort(e.classes.begin(), e.classes.end());
  e.classes.erase(std::unique(e.classes.begin(), e.classes.end()), e.classes.end());
  e.y.reserve(labels.size());
  for (const auto& l : labels)
    e.y.push_back(static_cast<int>(std::lower_bound(e.classes.begin(), e.classes.end(), l) - e.classes.begin()));
  return e;
}

Classifier train_classifier(ClassifierKind kind, const Matrix& x, std::span<const std::string> labels,
                            const ClassifierParams& p) {
  if (x.rows() == 0) fail(Errc::EmptyData, "empty training matrix");
  if (labels.size() != x.rows()) fail(Errc::DimensionMismatch, "label count differs from row count");
  auto enc = encode_labels(labels);
  const int k = static_cast<int>(enc.classes.size());
  Classifier c;
  c.kind = kind;
  c.classes = enc.classes;
  switch (kind) {
    case ClassifierKind::Cart:
      c.model = train_cart(x, enc.y, k, p.max_depth, p.min_leaf, p.seed);
      break;
    case ClassifierKind::RandomForest:
    case ClassifierKind::ExtraTrees: {
      ForestParams fp;
      fp.kind = kind == ClassifierKind::RandomForest ? ForestKind::Bagged : ForestKind::Extra;
      fp.n_trees = p.n_trees;
      fp.max_depth = p.max_depth;
      fp.min_leaf = p.min_leaf;
      fp.seed = p.seed;
      c.model = train_forest(x, enc.y, k, fp);
      break;
    }
    case ClassifierKind::Gbt:
      c.model = train_gbt(x, enc.y, k, p.gbt);
      break;
    case ClassifierKind::Knn:
      c.model = train_knn(x, enc.y, k, p.knn_k);
      break;
    case ClassifierKind::Gnb:
      c.model = train_gnb(x, enc.y, k, p.gnb_floor_ratio);
      break;
    case ClassifierKind::LinearSvm: {
      auto svm = p.svm;
      svm.seed = p.seed;
      c.model = train_linear_svm(x, enc.y, k, svm);
      break;
    }
  }
  return c;
}

Matrix predict_proba(const Classifier& c, const Matrix& x) {
  return std::visit([&](const auto& m) { return predict_proba(m, x); }, c.model);
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    out[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

std::vector<int> predict_index(const Classifier& c, const Matrix& x) { return argmax_rows(predict_proba(c, x)); }

std::vector<std::string> predict(const Classifier& c, const Matrix& x) {
  std::vector<std::string> out;
  for (int i : predict_index(c, x)) out.push_back(c.classes[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace zcam::ml
