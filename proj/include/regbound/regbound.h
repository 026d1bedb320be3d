/* C interface to the regbound library. Every call returns an rb_status; on failure
 * rb_last_error() describes the problem (thread-local, valid until the next call on the thread).
 * Strings returned through char** are owned by the caller and released with rb_string_free. */
#ifndef REGBOUND_H
#define REGBOUND_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RB_API __declspec(dllexport)
#else
#define RB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rb_status {
  RB_OK = 0,
  RB_VERIFICATION = 1, /* a checked property failed */
  RB_USAGE = 2,        /* bad arguments, malformed input, violated precondition */
  RB_RESOURCE = 3,     /* enumeration cap or retry budget exhausted */
  RB_IO = 4,
  RB_INTERNAL = 5
} rb_status;

typedef enum rb_mode { RB_MODE_EXACT = 0, RB_MODE_SAMPLED = 1 } rb_mode;

typedef struct rb_check_options {
  rb_mode mode;
  uint64_t cap;  /* 0 picks the default (REGBOUND_CAP or 2^24) */
  uint64_t seed;
} rb_check_options;

typedef struct rb_core rb_core;                     /* iterated core sequence */
typedef struct rb_hypergraph rb_hypergraph;         /* pasted k-graph instance */
typedef struct rb_counterexample rb_counterexample; /* triangle-free tripartite instance */
typedef struct rb_certificate rb_certificate;       /* irregularity certificate */

RB_API const char* rb_version(void);
RB_API const char* rb_last_error(void);
RB_API void rb_string_free(char* s);
RB_API void rb_check_options_init(rb_check_options* opt);

/* ---- utilities ---- */
RB_API rb_status rb_ackermann(uint32_t k, uint64_t n, char** out);
RB_API rb_status rb_hash_file(const char* path, char** hex);
/* Writes run.json into dir: command, inputs (JSON text), seed, hashes of every other file, version, timing. */
RB_API rb_status rb_write_run_manifest(const char* dir, const char* command, const char* inputs_json, uint64_t seed,
                                       double seconds);
/* Kind of artifact directory: "core", "hypergraph" or "counterexample". */
RB_API rb_status rb_artifact_kind(const char* dir, char** kind);
/* Built-in default configuration: which is "core-profile", "schedule" or "counterexample". */
RB_API rb_status rb_default_config(const char* which, char** json);

/* ---- core sequences ---- */
/* profile_json NULL selects the desk profile. */
RB_API rb_status rb_core_build(const char* profile_json, uint64_t seed, rb_core** out);
RB_API rb_status rb_core_load(const char* dir, rb_core** out);
RB_API rb_status rb_core_save(const rb_core* core, const char* dir);
RB_API void rb_core_free(rb_core* core);
RB_API uint32_t rb_core_levels(const rb_core* core);
/* Suites: "structure", "core-properties", "all". passed receives 1 or 0; the report is JSON. */
RB_API rb_status rb_core_verify(const rb_core* core, const char* suite, const rb_check_options* opt, int* passed,
                                char** report_json);
/* side 'L' or 'R'; the partition text format. */
RB_API rb_status rb_core_partition(const rb_core* core, char side, uint32_t level, char** text);

/* ---- certificates ---- */
/* Refutes (P,Q) for member `member` of level ell; gamma NULL selects the default. */
RB_API rb_status rb_certify(const rb_core* core, uint32_t ell, uint32_t member, const char* P_text, const char* Q_text,
                            const char* delta, uint32_t t, const char* gamma, rb_certificate** out);
RB_API rb_status rb_certificate_parse(const char* text, rb_certificate** out);
RB_API rb_status rb_certificate_text(const rb_certificate* cert, char** text);
RB_API int rb_certificate_refutes(const rb_certificate* cert);
RB_API size_t rb_certificate_lines(const rb_certificate* cert);
/* Recomputes every ledger line against the member graph named in the certificate. */
RB_API rb_status rb_certificate_verify(const rb_certificate* cert, const rb_core* core, int* passed, char** report_json);
RB_API void rb_certificate_free(rb_certificate* cert);

/* ---- pasted hypergraph instances ---- */
/* n = 0 picks the smallest admissible class size; schedule_json NULL selects the desk schedule. */
RB_API rb_status rb_hypergraph_build(uint32_t k, uint32_t s, uint64_t n, const char* schedule_json, uint64_t seed,
                                     rb_hypergraph** out);
RB_API rb_status rb_hypergraph_load(const char* dir, rb_hypergraph** out);
RB_API rb_status rb_hypergraph_save(const rb_hypergraph* h, const char* dir);
RB_API void rb_hypergraph_free(rb_hypergraph* h);
/* Suites: "family", "pasted", "all". */
RB_API rb_status rb_hypergraph_verify(const rb_hypergraph* h, const char* suite, const rb_check_options* opt,
                                      int* passed, char** report_json);
/* The chain partition at `level` in the layout of the pasted k-graph. */
RB_API rb_status rb_hypergraph_partition(const rb_hypergraph* h, uint64_t level, char** text);

/* ---- counterexample ---- */
/* params_json NULL uses defaults; relaxed < 0 keeps the file's flag, 0 forces strict, 1 forces relaxed. */
RB_API rb_status rb_counterexample_build(const char* params_json, uint64_t seed, int relaxed, rb_counterexample** out);
RB_API rb_status rb_counterexample_load(const char* dir, rb_counterexample** out);
RB_API rb_status rb_counterexample_save(const rb_counterexample* c, const char* dir);
RB_API void rb_counterexample_free(rb_counterexample* c);
/* Suite "counterexample" (or "all"); blowup_samples random (S,T) pairs for the blowup check. */
RB_API rb_status rb_counterexample_verify(const rb_counterexample* c, const char* suite, const rb_check_options* opt,
                                          uint32_t blowup_samples, int* passed, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
