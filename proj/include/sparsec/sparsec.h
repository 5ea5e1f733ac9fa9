#ifndef SPARSEC_SPARSEC_H
#define SPARSEC_SPARSEC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SPARSEC_API __declspec(dllexport)
#else
#define SPARSEC_API __attribute__((visibility("default")))
#endif

typedef enum sparsec_status {
    SPARSEC_OK = 0,
    SPARSEC_INVALID_ARGUMENT = 1,
    SPARSEC_PARSE = 2,
    SPARSEC_INVALID_MACHINE = 3,
    SPARSEC_TIME_BOUND_EXCEEDED = 4,
    SPARSEC_INVALID_SYMBOL = 5,
    SPARSEC_MISSING_POLYNOMIAL = 6,
    SPARSEC_ARITY_MISMATCH = 7,
    SPARSEC_CYCLIC_GRAPH = 8,
    SPARSEC_TOO_MANY_INPUTS = 9,
    SPARSEC_WEIGHT_OVERFLOW = 10,
    SPARSEC_BAD_DELTA = 11,
    SPARSEC_BUDGET_INFEASIBLE = 12,
    SPARSEC_DIMENSION_MISMATCH = 13,
    SPARSEC_DEPTH_OUT_OF_RANGE = 14,
    SPARSEC_NOT_UNIVARIATE = 15,
    SPARSEC_OUT_OF_RANGE = 16,
    SPARSEC_WIDTH_MISMATCH = 17,
    SPARSEC_WIDTH_OVERFLOW = 18,
    SPARSEC_BAD_POINT = 19,
    SPARSEC_OUT_OF_DOMAIN = 20,
    SPARSEC_UNCOVERED_PATTERN = 21,
    SPARSEC_CHECK_FAILED = 22,
    SPARSEC_IO = 23,
    SPARSEC_INTERNAL = 24
} sparsec_status;

typedef enum sparsec_mode { SPARSEC_MODE_EXACT = 0, SPARSEC_MODE_ROBUST = 1 } sparsec_mode;

typedef struct sparsec_machine sparsec_machine;
typedef struct sparsec_circuit sparsec_circuit;
typedef struct sparsec_ltf sparsec_ltf;
typedef struct sparsec_network sparsec_network;
typedef struct sparsec_poly sparsec_poly;
typedef struct sparsec_program sparsec_program;
typedef struct sparsec_predictor sparsec_predictor;

/* Library-wide. Strings returned through char** are owned by the caller. */
SPARSEC_API const char* sparsec_version(void);
SPARSEC_API const char* sparsec_status_name(sparsec_status s);
/* Message of the last failing call on this thread ("" if none). */
SPARSEC_API const char* sparsec_last_error_message(void);
SPARSEC_API void sparsec_string_free(char* s);
/* 0 ok, 1 check failure, 2 input error, 3 infeasible configuration. */
SPARSEC_API int sparsec_exit_code_for(sparsec_status s);

/* Turing machines. Builtins: identity (width n), parity, adder2, constant_one. */
SPARSEC_API sparsec_status sparsec_machine_from_json(const char* json, sparsec_machine** out);
SPARSEC_API sparsec_status sparsec_machine_builtin(const char* name, size_t n, sparsec_machine** out);
SPARSEC_API sparsec_status sparsec_machine_to_json(const sparsec_machine* m, char** out_json);
SPARSEC_API void sparsec_machine_free(sparsec_machine* m);
/* time_bound 0 means the declared polynomial bound. Writes the full trace as JSON. */
SPARSEC_API sparsec_status sparsec_machine_run(const sparsec_machine* m, const uint8_t* input, size_t n,
                                               uint64_t time_bound, char** out_trace_json);
SPARSEC_API sparsec_status sparsec_machine_time_bound(const sparsec_machine* m, size_t n, uint64_t* out);

/* Tableau unrolling. time_bound 0 means automatic. report: certificate and bounds. */
SPARSEC_API sparsec_status sparsec_unroll(const sparsec_machine* m, size_t n, uint64_t time_bound,
                                          sparsec_circuit** out, char** out_report_json);
/* CSV of size/depth versus n plus the fitted log-log slope of s against T. */
SPARSEC_API sparsec_status sparsec_build_report_csv(const sparsec_machine* m, const size_t* n_values, size_t count,
                                                    char** out_csv);

/* Circuits. Builtins: and_tree, parity_tree, ripple_adder (width n), not, and, or, xor. */
SPARSEC_API sparsec_status sparsec_circuit_from_json(const char* json, sparsec_circuit** out);
SPARSEC_API sparsec_status sparsec_circuit_builtin(const char* name, size_t n, sparsec_circuit** out);
SPARSEC_API sparsec_status sparsec_circuit_to_json(const sparsec_circuit* c, char** out_json);
SPARSEC_API void sparsec_circuit_free(sparsec_circuit* c);
SPARSEC_API size_t sparsec_circuit_input_count(const sparsec_circuit* c);
SPARSEC_API size_t sparsec_circuit_output_count(const sparsec_circuit* c);
SPARSEC_API sparsec_status sparsec_circuit_evaluate(const sparsec_circuit* c, const uint8_t* input, size_t n,
                                                    uint8_t* out, size_t out_capacity);
/* {"k","s","L","input_bits","output_bits"} */
SPARSEC_API sparsec_status sparsec_circuit_certify(const sparsec_circuit* c, char** out_json);
/* Array of violations, empty when the circuit is well formed. */
SPARSEC_API sparsec_status sparsec_circuit_validate(const sparsec_circuit* c, char** out_json);
/* Same, straight from circuit JSON that from_json would reject. */
SPARSEC_API sparsec_status sparsec_circuit_validate_json(const char* json, char** out_json);
/* {"equivalent":bool,"counterexample":[bits]} */
SPARSEC_API sparsec_status sparsec_circuit_equiv(const sparsec_circuit* a, const sparsec_circuit* b, char** out_json);

/* Threshold circuits. */
SPARSEC_API sparsec_status sparsec_ltf_from_circuit(const sparsec_circuit* c, sparsec_ltf** out);
SPARSEC_API sparsec_status sparsec_ltf_from_json(const char* json, sparsec_ltf** out);
SPARSEC_API sparsec_status sparsec_ltf_to_json(const sparsec_ltf* l, char** out_json);
SPARSEC_API void sparsec_ltf_free(sparsec_ltf* l);
SPARSEC_API sparsec_status sparsec_ltf_lower(const sparsec_ltf* l, sparsec_circuit** out);
SPARSEC_API sparsec_status sparsec_ltf_roundtrip(const sparsec_circuit* c, char** out_report_json);

/* ReLU networks. */
SPARSEC_API sparsec_status sparsec_neuralize(const sparsec_circuit* c, double eps_total, sparsec_mode mode,
                                             double delta, sparsec_network** out, char** out_report_json);
SPARSEC_API sparsec_status sparsec_network_from_json(const char* json, sparsec_network** out);
SPARSEC_API sparsec_status sparsec_network_to_json(const sparsec_network* net, char** out_json);
SPARSEC_API void sparsec_network_free(sparsec_network* net);
SPARSEC_API size_t sparsec_network_input_width(const sparsec_network* net);
SPARSEC_API size_t sparsec_network_output_width(const sparsec_network* net);
SPARSEC_API sparsec_status sparsec_network_evaluate(const sparsec_network* net, const double* x, size_t n, double* out,
                                                    size_t out_capacity);
SPARSEC_API sparsec_status sparsec_network_regions_1d(const sparsec_network* net, double lo, double hi,
                                                      uint64_t* out_count);
SPARSEC_API sparsec_status sparsec_allocate_budget(size_t L, double K, double eps_total, double* out_eps_gate);
/* {"depth","region_count","shallow_units_needed","network"} */
SPARSEC_API sparsec_status sparsec_telgarsky(int depth, char** out_json);

/* Fixed point and bit programs. Builtins: square, identity, doubling, zero. */
SPARSEC_API sparsec_status sparsec_encode(const double* x, size_t d, int n, uint8_t* out, size_t out_capacity);
SPARSEC_API sparsec_status sparsec_decode(const uint8_t* bits, size_t count, int frac_bits, int int_bits, int is_signed,
                                          double* out, size_t out_capacity);
SPARSEC_API sparsec_status sparsec_program_from_json(const char* json, sparsec_program** out);
SPARSEC_API sparsec_status sparsec_program_builtin(const char* name, sparsec_program** out);
SPARSEC_API sparsec_status sparsec_program_to_json(const sparsec_program* p, char** out_json);
SPARSEC_API void sparsec_program_free(sparsec_program* p);
SPARSEC_API sparsec_status sparsec_program_compile(const sparsec_program* p, int n, int m_out, sparsec_circuit** out);
SPARSEC_API sparsec_status sparsec_program_check(const sparsec_program* p, int n, int m_out, double L_f,
                                                 size_t samples, uint64_t seed, sparsec_mode mode, double delta,
                                                 char** out_report_json);

/* Fourier polynomials; JSON {"dim", "terms":[{"vars":[...],"coeff":"p/q"}]}. */
SPARSEC_API sparsec_status sparsec_poly_from_json(const char* json, sparsec_poly** out);
SPARSEC_API sparsec_status sparsec_poly_to_json(const sparsec_poly* p, char** out_json);
SPARSEC_API void sparsec_poly_free(sparsec_poly* p);
SPARSEC_API sparsec_status sparsec_poly_compose(const sparsec_poly* f, const sparsec_poly* const* g, size_t count,
                                                sparsec_poly** out);
SPARSEC_API sparsec_status sparsec_poly_check_bounds(const sparsec_poly* f, const sparsec_poly* const* g, size_t count,
                                                     const sparsec_poly* h, char** out_json);
/* Exact value as "p/q". */
SPARSEC_API sparsec_status sparsec_poly_evaluate(const sparsec_poly* p, const int* x, size_t n, char** out_value);
SPARSEC_API sparsec_status sparsec_poly_active_variables(const sparsec_poly* p, char** out_json);
SPARSEC_API sparsec_status sparsec_fourier_sweep(size_t instances, uint64_t seed, char** out_json);
SPARSEC_API sparsec_status sparsec_fourier_tree(int levels, char** out_json);

/* Multilinear lift. */
SPARSEC_API sparsec_status sparsec_lift_evaluate(const sparsec_circuit* c, const double* x, size_t n, double* out,
                                                 size_t out_capacity);
/* Vertex exactness, per-node ranges and a perturbation sweep. */
SPARSEC_API sparsec_status sparsec_lift_report(const sparsec_circuit* c, double eps, size_t samples, uint64_t seed,
                                               char** out_json);

/* Trace learning. Datasets are JSON lines: a header object, then one token array per line. */
SPARSEC_API sparsec_status sparsec_arlearn_generate(const sparsec_circuit* c, size_t samples, uint64_t seed,
                                                    char** out_jsonl);
SPARSEC_API sparsec_status sparsec_arlearn_fit(const sparsec_circuit* c, const char* jsonl, sparsec_predictor** out);
SPARSEC_API sparsec_status sparsec_predictor_from_json(const char* json, sparsec_predictor** out);
SPARSEC_API sparsec_status sparsec_predictor_to_json(const sparsec_predictor* p, char** out_json);
SPARSEC_API void sparsec_predictor_free(sparsec_predictor* p);
SPARSEC_API sparsec_status sparsec_arlearn_predict(const sparsec_predictor* p, const sparsec_circuit* c,
                                                   const uint8_t* input, size_t n, uint8_t* out, size_t out_capacity);
/* {"equivalent", "coverage":{...}} over all inputs. */
SPARSEC_API sparsec_status sparsec_arlearn_eval(const sparsec_predictor* p, const sparsec_circuit* c, char** out_json);
SPARSEC_API sparsec_status sparsec_arlearn_curve(const sparsec_circuit* c, const double* deltas, size_t count,
                                                 size_t trials, uint64_t seed, char** out_json);
SPARSEC_API sparsec_status sparsec_arlearn_trials(const sparsec_circuit* c, size_t samples, size_t trials,
                                                  uint64_t seed, char** out_json);

/* Full pipeline. config is a JSON object; result JSON holds "exit", "failed_stage",
   "diagnostics", "circuit", "network" and "report_csv". */
SPARSEC_API sparsec_status sparsec_pipeline_run(const char* config_json, char** out_result_json);

#ifdef __cplusplus
}
#endif

#endif
