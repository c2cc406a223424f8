#ifndef BENCHFOLD_ISOTONIC_HPP
#define BENCHFOLD_ISOTONIC_HPP

#include <span>
#include <vector>

namespace benchfold {

/// How tied input ranks constrain their fitted values.
///   primary:   tied ranks are unconstrained relative to each other
///   secondary: tied ranks must receive equal fitted values
enum class TieRule { primary, secondary };

/// Weighted pool-adjacent-violators on an already ordered sequence.
/// Zero-weight entries take the value of the block they are pooled into.
std::vector<double> pava(std::span<const double> targets, std::span<const double> weights);

/// Weighted least-squares fit of `targets` that is weakly increasing in
/// `ranks`. Empty `weights` means unit weights. Throws StructuralError on
/// length mismatch, negative or non-finite input.
std::vector<double> monotone_regress(std::span<const double> ranks, std::span<const double> targets,
                                     std::span<const double> weights, TieRule tie_rule);

} // namespace benchfold

#endif
