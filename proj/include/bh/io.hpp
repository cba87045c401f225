#pragma once

#include <string>
#include <vector>

#include "bh/field.hpp"

namespace bh {

// Binary field file: "BHFLD1", int32 n, int32 N, int32 components, uint8 complex
// flag, then each component as (N+2)^n values, row-major, last axis fastest,
// little-endian doubles (re, im pairs when complex).
void write_fields(const std::string& path, const std::vector<ScalarField>& comps);
std::vector<ScalarField> read_fields(const std::string& path);

void write_field(const std::string& path, const ScalarField& f);
ScalarField read_field(const std::string& path);
void write_field(const std::string& path, const VectorField& A);
VectorField read_vector_field(const std::string& path);

} // namespace bh
