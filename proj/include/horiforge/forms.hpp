#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "horiforge/exact.hpp"

namespace hf {

struct ModelMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InvalidFluxError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A word is a sorted list of generator indices.  Repeats are allowed only
/// for even-degree generators; the Koszul sign of sorting is absorbed into
/// the coefficient.
using Word = std::vector<unsigned char>;

template <class R>
class Form;

/// Truncated free graded-commutative algebra on named generators.
/// Generators have degree >= 1; words of total degree > max_degree vanish.
template <class R>
class ModelAlgebra : public std::enable_shared_from_this<ModelAlgebra<R>> {
 public:
  struct Generator {
    std::string name;
    int degree;
    Form<R> differential;  // pure degree `degree + 1`, possibly zero
  };

  static std::shared_ptr<ModelAlgebra> create(int max_degree) {
    if (max_degree < 1) throw std::invalid_argument("max_degree must be >= 1");
    return std::shared_ptr<ModelAlgebra>(new ModelAlgebra(max_degree));
  }

  /// Declares a generator; the differential is set afterwards (it may refer
  /// to generators declared later, e.g. `d A = F`).
  int add_generator(const std::string& name, int degree) {
    if (degree < 1)
      throw std::invalid_argument("generator '" + name + "': degree must be >= 1");
    if (index_of(name) >= 0)
      throw std::invalid_argument("duplicate generator '" + name + "'");
    if (gens_.size() >= 255) throw std::invalid_argument("too many generators");
    gens_.push_back({name, degree, Form<R>(this->shared_from_this())});
    return static_cast<int>(gens_.size()) - 1;
  }

  void set_differential(int gen, const Form<R>& df);

  /// Checks d(d(g)) = 0 and the degree rule for every generator.
  void validate() const;

  int max_degree() const { return max_degree_; }
  int generator_count() const { return static_cast<int>(gens_.size()); }
  const Generator& generator(int i) const { return gens_.at(i); }
  int degree_of(int i) const { return gens_.at(i).degree; }
  bool is_odd(int i) const { return gens_.at(i).degree % 2 != 0; }

  int index_of(const std::string& name) const {
    for (size_t i = 0; i < gens_.size(); ++i)
      if (gens_[i].name == name) return static_cast<int>(i);
    return -1;
  }

  int word_degree(const Word& w) const {
    int d = 0;
    for (auto g : w) d += gens_[g].degree;
    return d;
  }

  /// Sorts a word by declaration index accumulating the Koszul sign.
  /// Returns nullopt when the word vanishes (repeated odd generator or
  /// total degree beyond the truncation).
  std::optional<std::pair<Word, int>> normalize(Word w) const {
    if (word_degree(w) > max_degree_) return std::nullopt;
    int sign = 1;
    // insertion sort; each adjacent swap of generators a,b contributes
    // (-1)^{deg a * deg b}
    for (size_t i = 1; i < w.size(); ++i) {
      size_t j = i;
      while (j > 0 && w[j - 1] > w[j]) {
        if (is_odd(w[j - 1]) && is_odd(w[j])) sign = -sign;
        std::swap(w[j - 1], w[j]);
        --j;
      }
    }
    for (size_t i = 1; i < w.size(); ++i)
      if (w[i] == w[i - 1] && is_odd(w[i])) return std::nullopt;
    return std::make_pair(std::move(w), sign);
  }

 private:
  explicit ModelAlgebra(int max_degree) : max_degree_(max_degree) {}
  int max_degree_;
  std::vector<Generator> gens_;
};

template <class R>
using ModelPtr = std::shared_ptr<const ModelAlgebra<R>>;

/// Element of a ModelAlgebra: finite sum of normalized words with nonzero
/// coefficients.  Immutable-by-convention value type.
template <class R>
class Form {
 public:
  Form() = default;
  explicit Form(ModelPtr<R> model) : model_(std::move(model)) {}
  Form(ModelPtr<R> model, R scalar) : model_(std::move(model)) {
    if (!ring<R>::is_zero(scalar)) terms_[Word{}] = std::move(scalar);
  }

  static Form scalar(ModelPtr<R> model, R c) { return Form(std::move(model), std::move(c)); }
  static Form generator(ModelPtr<R> model, int idx) {
    Form f(std::move(model));
    f.terms_[Word{static_cast<unsigned char>(idx)}] = ring<R>::one();
    return f;
  }

  const ModelPtr<R>& model() const { return model_; }
  const std::map<Word, R>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  R scalar_part() const {
    auto it = terms_.find(Word{});
    return it == terms_.end() ? ring<R>::zero() : it->second;
  }

  void add_term(const Word& raw, const R& c) {
    if (ring<R>::is_zero(c)) return;
    if (raw.empty()) {  // scalar term; valid even without a model
      auto it = terms_.find(raw);
      if (it == terms_.end()) {
        terms_[raw] = c;
      } else {
        it->second = it->second + c;
        if (ring<R>::is_zero(it->second)) terms_.erase(it);
      }
      return;
    }
    auto n = model_->normalize(raw);
    if (!n) return;
    R signed_c = n->second == 1 ? c : static_cast<R>(-c);
    auto it = terms_.find(n->first);
    if (it == terms_.end()) {
      terms_[n->first] = signed_c;
    } else {
      it->second = it->second + signed_c;
      if (ring<R>::is_zero(it->second)) terms_.erase(it);
    }
  }

  Form operator+(const Form& o) const {
    check_model(o);
    Form r = *this;
    if (!r.model_) r.model_ = o.model_;
    for (const auto& [w, c] : o.terms_) {
      auto it = r.terms_.find(w);
      if (it == r.terms_.end()) {
        r.terms_[w] = c;
      } else {
        it->second = it->second + c;
        if (ring<R>::is_zero(it->second)) r.terms_.erase(it);
      }
    }
    return r;
  }
  Form operator-() const {
    Form r(model_);
    for (const auto& [w, c] : terms_) r.terms_[w] = -c;
    return r;
  }
  Form operator-(const Form& o) const { return *this + (-o); }

  /// Exterior (wedge) product.
  Form operator*(const Form& o) const {
    check_model(o);
    Form r(model_ ? model_ : o.model_);
    for (const auto& [w1, c1] : terms_)
      for (const auto& [w2, c2] : o.terms_) {
        Word w = w1;
        w.insert(w.end(), w2.begin(), w2.end());
        r.add_term(w, c1 * c2);
      }
    return r;
  }

  Form scaled(const R& c) const {
    Form r(model_);
    if (ring<R>::is_zero(c)) return r;
    for (const auto& [w, k] : terms_) {
      R v = k * c;
      if (!ring<R>::is_zero(v)) r.terms_[w] = v;
    }
    return r;
  }

  bool operator==(const Form& o) const { return terms_ == o.terms_; }

  int min_degree() const {
    int d = -1;
    for (const auto& [w, c] : terms_) {
      int wd = wdeg(w);
      if (d < 0 || wd < d) d = wd;
    }
    return d;
  }
  int max_term_degree() const {
    int d = 0;
    for (const auto& [w, c] : terms_) d = std::max(d, wdeg(w));
    return d;
  }

  bool is_homogeneous(int* degree_out = nullptr) const {
    int d = -1;
    for (const auto& [w, c] : terms_) {
      int wd = wdeg(w);
      if (d < 0) d = wd;
      else if (wd != d) return false;
    }
    if (degree_out) *degree_out = d < 0 ? 0 : d;
    return true;
  }
  /// True when all words have the same degree parity (0 counts as any parity).
  bool has_pure_parity(int* parity_out = nullptr) const {
    int p = -1;
    for (const auto& [w, c] : terms_) {
      int wp = wdeg(w) % 2;
      if (p < 0) p = wp;
      else if (wp != p) return false;
    }
    if (parity_out) *parity_out = p < 0 ? 0 : p;
    return true;
  }

  bool contains_generator(int idx) const {
    for (const auto& [w, c] : terms_)
      for (auto g : w)
        if (g == idx) return true;
    return false;
  }

  /// True when the scalar part is zero (so the form is nilpotent).
  bool is_nilpotent() const { return terms_.find(Word{}) == terms_.end(); }

  /// Multiplicative inverse; requires an invertible scalar part, the
  /// nilpotent remainder is handled by a terminating geometric series.
  Form inv() const {
    R s = scalar_part();
    R si = ring<R>::inv(s);  // throws when not invertible
    if (terms_.size() <= 1) return Form::scalar(model_, si);
    Form n = (*this - Form::scalar(model_, s)).scaled(si);  // nilpotent
    Form acc = Form::scalar(model_, ring<R>::one());
    Form pw = Form::scalar(model_, ring<R>::one());
    int guard = model_->max_degree() + 1;
    for (int k = 1; k <= guard && !pw.is_zero(); ++k) {
      pw = pw * n;
      acc = (k % 2 == 1) ? acc - pw : acc + pw;
    }
    return acc.scaled(si);
  }

  double max_abs_coeff() const {
    double m = 0;
    for (const auto& [w, c] : terms_) m = std::max(m, std::abs(ring<R>::to_complex(c)));
    return m;
  }

  std::string str() const;

  int wdeg(const Word& w) const { return w.empty() ? 0 : model_->word_degree(w); }

 private:
  void check_model(const Form& o) const {
    if (model_ && o.model_ && model_ != o.model_)
      throw ModelMismatchError("forms belong to different model algebras");
  }
  ModelPtr<R> model_;
  std::map<Word, R> terms_;
};

// ---------------------------------------------------------------------------
// Operations

/// Exterior derivative, extended from the generators by the graded Leibniz
/// rule: d(g1...gk) = sum_i (-1)^{deg(g1...g_{i-1})} g1... d(gi) ...gk.
template <class R>
Form<R> d(const Form<R>& a) {
  const auto& model = a.model();
  Form<R> r(model);
  for (const auto& [w, c] : a.terms()) {
    int prefix_deg = 0;
    for (size_t i = 0; i < w.size(); ++i) {
      const auto& dg = model->generator(w[i]).differential;
      if (!dg.is_zero()) {
        // prefix * d(g_i) * suffix, with the Leibniz sign on the prefix
        Form<R> left = Form<R>::scalar(model, prefix_deg % 2 == 0
                                                  ? c
                                                  : static_cast<R>(-c));
        for (size_t j = 0; j < i; ++j)
          left = left * Form<R>::generator(model, w[j]);
        Form<R> piece = left * dg;
        for (size_t j = i + 1; j < w.size(); ++j)
          piece = piece * Form<R>::generator(model, w[j]);
        r = r + piece;
      }
      prefix_deg += model->degree_of(w[i]);
    }
  }
  return r;
}

/// Projection onto total degree p.
template <class R>
Form<R> degree_component(const Form<R>& a, int p) {
  Form<R> r(a.model());
  for (const auto& [w, c] : a.terms())
    if (a.wdeg(w) == p) r.add_term(w, c);
  return r;
}

/// Twisted differential a |-> d(a) + m H /\ a.  H must be a closed 3-form.
template <class R>
Form<R> twisted_d(int m, const Form<R>& H, const Form<R>& a) {
  int hd = -1;
  if (!H.is_zero() && (!H.is_homogeneous(&hd) || hd != 3))
    throw InvalidFluxError("flux H must have pure degree 3");
  if (!d(H).is_zero()) throw InvalidFluxError("flux H must be closed");
  Form<R> twist = (H * a).scaled(ring<R>::from_int(m));
  return d(a) + twist;
}

template <class R>
void ModelAlgebra<R>::set_differential(int gen, const Form<R>& df) {
  if (!df.is_zero()) {
    int dd = -1;
    if (!df.is_homogeneous(&dd) || dd != gens_.at(gen).degree + 1)
      throw std::invalid_argument("d(" + gens_[gen].name +
                                  ") must have pure degree deg+1");
  }
  gens_.at(gen).differential = df;
}

template <class R>
void ModelAlgebra<R>::validate() const {
  for (size_t i = 0; i < gens_.size(); ++i) {
    const auto& df = gens_[i].differential;
    if (!d(df).is_zero())
      throw std::invalid_argument("d(d(" + gens_[i].name + ")) != 0");
  }
}

template <class R>
std::string Form<R>::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (const auto& [w, c] : terms_) {
    if (!s.empty()) s += " + ";
    Cx cc = ring<R>::to_complex(c);
    std::ostringstream os;
    os << "(" << cc.real();
    if (cc.imag() != 0) os << (cc.imag() > 0 ? "+" : "") << cc.imag() << "i";
    os << ")";
    for (auto g : w) os << "*" << model_->generator(g).name;
    s += os.str();
  }
  return s;
}

}  // namespace hf
