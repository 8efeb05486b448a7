// Copyright 2026 The evid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Opinion algebra of subjective logic over Dirichlet evidence.
//
// All functions are pure and templated on the scalar type. Defaults follow the
// usual subjective-logic convention: uniform base rates a_j = 1/K and a
// non-informative prior weight W = K, so alpha = evidence + 1.

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "evid/errors.hpp"

namespace evid {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

template <typename Scalar>
constexpr Scalar kSumTolerance = Scalar(1e-10);

template <typename Derived>
void require_classes(const Eigen::MatrixBase<Derived>& v, const char* what) {
    if (v.size() < 2) {
        throw DomainError(std::string(what) + ": need at least 2 classes, got " +
                          std::to_string(v.size()));
    }
}

} // namespace detail

/// Multinomial opinion (beliefs, uncertainty mass, base rates) over K classes.
template <typename Scalar = double>
class Opinion {
public:
    using VectorType = Vector<Scalar>;

    Opinion(VectorType beliefs, Scalar uncertainty, VectorType base_rates)
        : beliefs_(std::move(beliefs)), uncertainty_(uncertainty), base_rates_(std::move(base_rates)) {
        detail::require_classes(beliefs_, "Opinion");
        if (base_rates_.size() != beliefs_.size()) {
            throw DomainError("Opinion: base rates and beliefs differ in length");
        }
        if ((beliefs_.array() < Scalar(0)).any() || uncertainty_ < Scalar(0)) {
            throw DomainError("Opinion: belief and uncertainty masses must be nonnegative");
        }
        if ((base_rates_.array() <= Scalar(0)).any()) {
            throw DomainError("Opinion: base rates must be positive");
        }
        using std::abs;
        if (abs(beliefs_.sum() + uncertainty_ - Scalar(1)) > detail::kSumTolerance<Scalar>) {
            throw DomainError("Opinion: beliefs + uncertainty must sum to 1");
        }
        if (abs(base_rates_.sum() - Scalar(1)) > detail::kSumTolerance<Scalar>) {
            throw DomainError("Opinion: base rates must sum to 1");
        }
    }

    const VectorType& beliefs() const { return beliefs_; }
    Scalar uncertainty() const { return uncertainty_; }
    const VectorType& base_rates() const { return base_rates_; }
    Eigen::Index classes() const { return beliefs_.size(); }

private:
    VectorType beliefs_;
    Scalar uncertainty_;
    VectorType base_rates_;
};

/// Dirichlet concentration alpha with alpha_j >= 1 (nonnegative evidence).
template <typename Scalar = double>
class DirichletParams {
public:
    using VectorType = Vector<Scalar>;

    explicit DirichletParams(VectorType alpha) : alpha_(std::move(alpha)) {
        detail::require_classes(alpha_, "DirichletParams");
        if (!alpha_.allFinite()) {
            throw DomainError("DirichletParams: alpha must be finite");
        }
        if ((alpha_.array() < Scalar(1)).any()) {
            throw DomainError("DirichletParams: alpha_j must be >= 1");
        }
    }

    template <typename Derived>
    static DirichletParams from_evidence(const Eigen::MatrixBase<Derived>& evidence) {
        if ((evidence.array() < Scalar(0)).any()) {
            throw DomainError("DirichletParams: evidence must be nonnegative");
        }
        return DirichletParams(evidence.array() + Scalar(1));
    }

    const VectorType& alpha() const { return alpha_; }
    VectorType evidence() const { return alpha_.array() - Scalar(1); }
    Scalar strength() const { return alpha_.sum(); }
    Scalar prior_weight() const { return Scalar(alpha_.size()); }
    Eigen::Index classes() const { return alpha_.size(); }

private:
    VectorType alpha_;
};

/// b_j = r_j / S, u = W / S with S = sum(r) + W and W = K.
template <typename DerivedE, typename DerivedA>
Opinion<typename DerivedE::Scalar> opinion_from_evidence(const Eigen::MatrixBase<DerivedE>& evidence,
                                                         const Eigen::MatrixBase<DerivedA>& base_rates) {
    using Scalar = typename DerivedE::Scalar;
    detail::require_classes(evidence, "opinion_from_evidence");
    if ((evidence.array() < Scalar(0)).any()) {
        throw DomainError("opinion_from_evidence: evidence must be nonnegative");
    }
    const Scalar weight = Scalar(evidence.size());
    const Scalar strength = evidence.sum() + weight;
    return Opinion<Scalar>(evidence / strength, weight / strength, base_rates);
}

template <typename DerivedE>
Opinion<typename DerivedE::Scalar> opinion_from_evidence(const Eigen::MatrixBase<DerivedE>& evidence) {
    using Scalar = typename DerivedE::Scalar;
    const auto k = evidence.size();
    detail::require_classes(evidence, "opinion_from_evidence");
    return opinion_from_evidence(evidence, Vector<Scalar>::Constant(k, Scalar(1) / Scalar(k)));
}

template <typename Scalar>
Opinion<Scalar> to_opinion(const DirichletParams<Scalar>& d) {
    return opinion_from_evidence(d.evidence());
}

/// p_j = b_j + a_j u.
template <typename Scalar>
Vector<Scalar> projected_probability(const Opinion<Scalar>& op) {
    return op.beliefs() + op.base_rates() * op.uncertainty();
}

/// E[p_j] = alpha_j / S.
template <typename Scalar>
Vector<Scalar> expected_probability(const DirichletParams<Scalar>& d) {
    return d.alpha() / d.strength();
}

/// Uncertainty from lack of evidence, W / S.
template <typename Scalar>
Scalar vacuity(const DirichletParams<Scalar>& d) {
    return d.prior_weight() / d.strength();
}

/// Relative balance of two belief masses; 0 unless both are nonzero.
template <typename Scalar>
Scalar mass_balance(Scalar b_j, Scalar b_i) {
    if (b_j < Scalar(0) || b_i < Scalar(0)) {
        throw DomainError("mass_balance: belief masses must be nonnegative");
    }
    if (b_j * b_i == Scalar(0)) {
        return Scalar(0);
    }
    using std::abs;
    return Scalar(1) - abs(b_j - b_i) / (b_j + b_i);
}

/// Dissonance of the belief vector. A term whose competing-mass denominator
/// is zero contributes zero, so single-sided opinions have no conflict.
template <typename Derived>
typename Derived::Scalar belief_dissonance(const Eigen::MatrixBase<Derived>& beliefs) {
    using Scalar = typename Derived::Scalar;
    const auto k = beliefs.size();
    Scalar total(0);
    for (Eigen::Index i = 0; i < k; ++i) {
        Scalar weighted(0);
        Scalar others(0);
        for (Eigen::Index j = 0; j < k; ++j) {
            if (j == i) {
                continue;
            }
            others += beliefs(j);
            weighted += beliefs(j) * mass_balance(beliefs(j), beliefs(i));
        }
        if (others > Scalar(0)) {
            total += beliefs(i) * weighted / others;
        }
    }
    return total;
}

template <typename Scalar>
Scalar dissonance(const DirichletParams<Scalar>& d) {
    return belief_dissonance(d.evidence() / d.strength());
}

/// Shannon entropy in nats, or in units of ln K when `normalized`.
template <typename Derived>
typename Derived::Scalar shannon_entropy(const Eigen::MatrixBase<Derived>& p, bool normalized = false) {
    using Scalar = typename Derived::Scalar;
    using std::log;
    Scalar h(0);
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        if (p(j) > Scalar(0)) {
            h -= p(j) * log(p(j));
        }
    }
    if (normalized) {
        h /= log(Scalar(p.size()));
    }
    return h;
}

} // namespace evid
