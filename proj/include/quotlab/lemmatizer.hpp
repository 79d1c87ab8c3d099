#pragma once

#include <string>
#include <string_view>

namespace quotlab {

// Reduces an inflected English verb form to its base form. Case-folds, then
// consults an irregular-form exception table, then falls back to suffix
// stripping (-ies/-ied -> -y, -es/-s, -ed, -ing) with undoubling and
// silent-e restoration. Unknown shapes come back unchanged. Idempotent.
std::string lemmatize_verb(std::string_view form);

// ASCII lowercase copy (the corpus is English; no locale involved).
std::string ascii_lower(std::string_view s);

} // namespace quotlab
