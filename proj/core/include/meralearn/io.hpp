#pragma once

// JSON documents for circuits, learning reports and contraction stats.
// Every document carries "format_version". Numbers are written in shortest
// round-trip form, so circuits reload bit-exactly.
//
// Statevector convention for readers: sites are 1-based and site 1 is the
// least significant bit of an amplitude index. Inside a gate, the first
// listed site is the most significant bit of the 4x4 basis index.

#include <string>

#include "meralearn/contraction.hpp"
#include "meralearn/learner.hpp"
#include "meralearn/renormalizer.hpp"
#include "meralearn/tomography.hpp"

namespace mera {

inline constexpr int kFormatVersion = 1;

std::string serialize(const MeraCircuit& c);
/// Throws ParseError naming the offending gate on malformed documents, wrong
/// shapes or gates further than 1e-6 from unitary.
MeraCircuit deserialize(const std::string& text);

std::string serialize(const LearnResult& r);
std::string serialize(const NoPostselectDiagnostics& d);
std::string serialize(const IndirectDiagnostics& d);
std::string serialize(const TomographyEstimate& e);
std::string serialize(const ContractionStats& s);

/// {"format_version", "error": {"type", "message"}}
std::string error_record(const std::string& type, const std::string& message);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mera
