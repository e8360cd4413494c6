#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zcam/forest.hpp"
#include "zcam/gbt.hpp"
#include "zcam/gnb.hpp"
#include "zcam/knn.hpp"
#include "zcam/linear_svm.hpp"
#include "zcam/tree.hpp"

namespace zcam::ml {

enum class ClassifierKind : std::uint8_t { Cart, RandomForest, ExtraTrees, Gbt, Knn, Gnb, LinearSvm };

std::string_view kind_name(ClassifierKind kind);
std::optional<ClassifierKind> parse_classifier_kind(std::string_view name);
inline constexpr std::array<ClassifierKind, 7> kAllClassifierKinds = {
    ClassifierKind::Cart, ClassifierKind::RandomForest, ClassifierKind::ExtraTrees, ClassifierKind::Gbt,
    ClassifierKind::Knn,  ClassifierKind::Gnb,          ClassifierKind::LinearSvm};

struct CartModel {
  DecisionTree tree;
  int n_classes = 0;
  bool operator==(const CartModel&) const = default;
};

CartModel train_cart(const Matrix& x, std::span<const int> y, int n_classes,
                     std::optional<std::size_t> max_depth = std::nullopt, std::size_t min_leaf = 1,
                     std::uint64_t seed = 0);
Matrix predict_proba(const CartModel& model, const Matrix& x);

/// Labels encoded as indices into the sorted distinct label strings.
struct EncodedLabels {
  std::vector<std::string> classes;
  std::vector<int> y;
};
EncodedLabels encode_labels(std::span<const std::string> labels);

struct ClassifierParams {
  std::optional<std::size_t> max_depth;  // trees (CART/forests)
  std::size_t min_leaf = 1;
  std::size_t n_trees = 100;
  GbtParams gbt;
  std::size_t knn_k = 5;
  double gnb_floor_ratio = 1e-9;
  LinearSvmParams svm;
  std::uint64_t seed = 0;
};

using ClassifierModel = std::variant<CartModel, ForestModel, GbtModel, KnnModel, GnbModel, LinearSvmModel>;

/// A trained supervised model together with its class labels.
struct Classifier {
  ClassifierKind kind = ClassifierKind::Cart;
  std::vector<std::string> classes;
  ClassifierModel model;
  bool operator==(const Classifier&) const = default;
};

Classifier train_classifier(ClassifierKind kind, const Matrix& x, std::span<const std::string> labels,
                            const ClassifierParams& params = {});
Matrix predict_proba(const Classifier& c, const Matrix& x);
/// Row-wise argmax of predict_proba (first maximum wins).
std::vector<int> predict_index(const Classifier& c, const Matrix& x);
std::vector<std::string> predict(const Classifier& c, const Matrix& x);

std::vector<int> argmax_rows(const Matrix& m);

}  // namespace zcam::ml
