#include "calibra/scalar_field.hpp"

#include "calibra/error.hpp"

namespace calibra {

namespace {

class CompositeField final : public ScalarField {
 public:
  CompositeField(ScalarFieldPtr outer, std::vector<ScalarFieldPtr> comps)
      : outer_(std::move(outer)), comps_(std::move(comps)) {
    if (comps_.empty()) throw Error("composition needs at least one component");
    dim_ = comps_.front()->dim();
    for (const auto& c : comps_)
      if (c->dim() != dim_) throw Error("composition components have mixed arity");
    if (outer_->dim() != static_cast<int>(comps_.size()))
      throw Error("outer arity does not match component count");
  }

  int dim() const override { return dim_; }

  Jet jet(const Eigen::VectorXd& x) const override {
    std::vector<Jet> cj;
    cj.reserve(comps_.size());
    Eigen::VectorXd y(comps_.size());
    for (size_t a = 0; a < comps_.size(); ++a) {
      cj.push_back(comps_[a]->jet(x));
      y(a) = cj.back().v;
    }
    return compose_jet(outer_->jet(y), cj);
  }

  double value(const Eigen::VectorXd& x) const override {
    Eigen::VectorXd y(comps_.size());
    for (size_t a = 0; a < comps_.size(); ++a) y(a) = comps_[a]->value(x);
    return outer_->value(y);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    Eigen::VectorXd y(comps_.size());
    std::vector<Eigen::VectorXd> cg;
    cg.reserve(comps_.size());
    for (size_t a = 0; a < comps_.size(); ++a) {
      y(a) = comps_[a]->value(x);
      cg.push_back(comps_[a]->gradient(x));
    }
    const Eigen::VectorXd og = outer_->gradient(y);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
    for (size_t a = 0; a < comps_.size(); ++a) g += og(a) * cg[a];
    return g;
  }

 private:
  ScalarFieldPtr outer_;
  std::vector<ScalarFieldPtr> comps_;
  int dim_;
};

}  // namespace

ScalarFieldPtr compose_field(ScalarFieldPtr outer, std::vector<ScalarFieldPtr> components) {
  return std::make_shared<CompositeField>(std::move(outer), std::move(components));
}

}  // namespace calibra
