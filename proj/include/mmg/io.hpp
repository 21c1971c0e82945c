#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmg/experiments.hpp"
#include "mmg/game.hpp"

namespace mmg {

inline constexpr const char* artifact_version = "1.0.0";

/// One `key=value` assignment read from configuration text or a flag.
struct ConfigEntry {
    std::string section;  // "game", "analysis", "ensemble" or "sweep"
    std::string key;
    std::string value;
    std::size_t line = 0;  // 0 for entries that did not come from text
    std::size_t column = 0;
};

struct SweepDirectives {
    SweepParameter parameter = SweepParameter::agents;
    std::vector<int> values;

    bool operator==(const SweepDirectives&) const = default;
};

/// A fully defaulted configuration.
struct ParsedConfig {
    GameConfig game;
    bool seed_given = false;
    std::int64_t ticks = 5000;
    int seeds = 10;
    unsigned threads = 0;
    AnalysisOptions analysis;
    std::optional<SweepDirectives> sweep;

    bool operator==(const ParsedConfig&) const = default;
};

/// Tokenizes configuration text. Throws SyntaxError with line and column.
///
/// Format: `#` starts a comment; `[name]` opens a section (default `game`);
/// elsewhere a line holds one or more `key=value` pairs separated by
/// whitespace. Spaces around `=` and after list commas are allowed.
std::vector<ConfigEntry> tokenize_config(std::string_view text);

/// Validates entries and fills every default. Later entries win. Unknown
/// keys raise SyntaxError; bad values raise ConfigError naming the key.
ParsedConfig materialize(std::span<const ConfigEntry> entries);

ParsedConfig parse_config(std::string_view text);

/// Inverse of parse_config with all defaults spelled out.
std::string serialize_config(const ParsedConfig& config);

enum class RecordFormat { csv, jsonl };

RecordFormat parse_record_format(std::string_view name);

/// csv: long form, header `t,k,O,A,astar,mu,C`, one row per (tick, market).
/// jsonl: one object per tick with per-market arrays.
void emit_records(std::span<const TickRecord> records, RecordFormat format, std::ostream& out);
std::string emit_records(std::span<const TickRecord> records, RecordFormat format);

std::vector<TickRecord> parse_records(std::string_view text, RecordFormat format);

/// 17 significant digits, shortest of %g style.
std::string format_real(double value);

/// FNV-1a 64-bit digest, rendered as "fnv1a64:<16 hex digits>".
std::string content_hash(std::string_view bytes);

struct RunManifest {
    GameConfig config;
    std::int64_t ticks = 0;
    std::string version = artifact_version;
    std::string format = "csv";
    std::string content_hash;

    bool operator==(const RunManifest&) const = default;
};

std::string serialize_manifest(const RunManifest& manifest);
RunManifest parse_manifest(std::string_view text);

void write_table_csv(const Table& table, std::ostream& out);
void write_summaries_csv(std::span<const RunSummary> runs, int markets, std::ostream& out);

}  // namespace mmg
