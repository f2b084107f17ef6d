#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "eqot/core_spaces.hpp"
#include "eqot/discrete_flow.hpp"
#include "eqot/graph_calculus.hpp"
#include "eqot/ollivier.hpp"
#include "eqot/report.hpp"
#include "eqot/transport.hpp"

namespace eqot::io {

using Json = nlohmann::json;

/// Raw bytes of a file; throws ParseError when unreadable.
std::string read_file(const std::string& path);

/// Parses JSON text; errors carry "<origin>:<line>:<column>".
Json parse_json(const std::string& text, const std::string& origin);
Json load_json(const std::string& path);

/// FNV-1a 64-bit hash as 16 lowercase hex digits.
std::string fnv1a_digest(const std::string& bytes);

/// Sorted keys, doubles as %.17g, non-finite doubles as "inf", "-inf" or
/// "nan" strings. Identical values give identical bytes.
std::string canonical_dump(const Json& value);

/// %.17g with "inf"/"-inf"/"nan" spellings.
std::string format_double(double x);

// Schema readers. Errors name the offending JSON pointer.
// Space: {"labels": [...]?, "distance": [[...]], "measure": [...]?}; the
// measure defaults to 1 on every point.
FiniteMetricMeasureSpace space_from_json(const Json& j);
Json to_json(const FiniteMetricMeasureSpace& space);

// Group: {"generators": [[perm], ...]}.
std::vector<Permutation> generators_from_json(const Json& j, Index degree);
Json generators_to_json(const std::vector<Permutation>& generators);

// Partition: {"leaves": [[...]], "conditionals": [[...]]?}.
LeafPartition partition_from_json(const Json& j,
                                  const FiniteMetricMeasureSpace& space);

// Measure: a bare weight array or {"weights": [...]}.
Measure measure_from_json(const Json& j, Index size);
Json to_json(const Measure& mu);

// Coupling table with its marginal residual.
Json coupling_to_json(const Coupling& pi, const Measure& mu0, const Measure& mu1);

// Chain: {"kernel": [[...]], "stationary": [...]?}.
MarkovChain markov_chain_from_json(const Json& j,
                                   const FiniteMetricMeasureSpace& space);
ReversibleChain reversible_chain_from_json(const Json& j);
Json kernel_to_json(const Matrix& kernel,
                    const std::optional<Vector>& stationary = std::nullopt);

// Graph: {"vertices": [...], "edges": [[i, j, w], ...], "measure": [...]?};
// the measure defaults to the weighted degree.
WeightedGraph graph_from_json(const Json& j);
Json to_json(const WeightedGraph& g);

// Plain numeric arrays and tables; "inf"/"-inf" strings are accepted.
Vector vector_from_json(const Json& j, const std::string& where);
Matrix matrix_from_json(const Json& j, const std::string& where);
Json to_json(const Vector& v);
Json to_json(const Matrix& m);

Json to_json(const CheckResult& check);
Json to_json(const RunReport& report);

std::string curvature_csv(const std::vector<CurvatureEntry>& table);
std::string cd_curvature_csv(const std::vector<std::pair<Index, double>>& rows,
                             const std::vector<std::string>& labels, double N);

}  // namespace eqot::io
