#ifndef INTERMO_H
#define INTERMO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IntermoStatus {
  INTERMO_STATUS_OK = 0,
  INTERMO_STATUS_NULL_POINTER = 1,
  INTERMO_STATUS_INVALID_UTF8 = 2,
  INTERMO_STATUS_INVALID_ARGUMENT = 3,
  INTERMO_STATUS_PARSE = 4,
  INTERMO_STATUS_DIALECT = 5,
  INTERMO_STATUS_MIDI = 6,
  INTERMO_STATUS_TOKENIZER = 7,
  INTERMO_STATUS_PANIC = 8,
} IntermoStatus;

/**
 * A parsed InterMo document.
 */
typedef struct IntermoDoc IntermoDoc;

/**
 * A loaded piece model.
 */
typedef struct IntermoTokenizer IntermoTokenizer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the next failing call.
 */
const char *intermo_last_error(void);

/**
 * Library version as a static string.
 */
const char *intermo_version(void);

/**
 * Parses and validates `text` in `dialect` (e.g. "TAST", "a2s_lite").
 *
 * # Safety
 * `text` and `dialect` must be NUL-terminated strings; `out` must be writable.
 */
enum IntermoStatus intermo_doc_parse(const char *text,
                                     const char *dialect,
                                     struct IntermoDoc **out);

/**
 * Reads a document from its JSON interchange form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum IntermoStatus intermo_doc_from_json(const char *json, struct IntermoDoc **out);

/**
 * # Safety
 * `doc` must come from this library and not be used afterwards.
 */
void intermo_doc_free(struct IntermoDoc *doc);

/**
 * Renders the document as InterMo text.
 *
 * # Safety
 * `doc` must be a live handle; `out` must be writable. Free the result with
 * `intermo_string_free`.
 */
enum IntermoStatus intermo_doc_render(const struct IntermoDoc *doc, char **out);

/**
 * Document as JSON.
 *
 * # Safety
 * As for `intermo_doc_render`.
 */
enum IntermoStatus intermo_doc_to_json(const struct IntermoDoc *doc, char **out);

/**
 * Validation report as JSON `{"errors": [...], "warnings": [...]}`.
 *
 * # Safety
 * As for `intermo_doc_render`.
 */
enum IntermoStatus intermo_doc_validate_json(const struct IntermoDoc *doc, char **out);

/**
 * Projects a document into `target`.
 *
 * # Safety
 * `doc` must be a live handle, `target` a NUL-terminated string, `out` writable.
 */
enum IntermoStatus intermo_doc_project(const struct IntermoDoc *doc,
                                       const char *target,
                                       struct IntermoDoc **out);

/**
 * Converts a Standard MIDI file image to AMT (or AMT_lite when `lite`), optionally
 * extending key releases to the pedal release first.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes; `out` must be writable.
 */
enum IntermoStatus intermo_midi_to_amt(const uint8_t *bytes,
                                       size_t len,
                                       bool pedoff,
                                       bool lite,
                                       struct IntermoDoc **out);

/**
 * Loads a tokenizer from the JSON model file contents.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum IntermoStatus intermo_tokenizer_from_json(const char *json, struct IntermoTokenizer **out);

/**
 * # Safety
 * `tok` must come from this library and not be used afterwards.
 */
void intermo_tokenizer_free(struct IntermoTokenizer *tok);

/**
 * Most likely segmentation of `text`. Release the ids with `intermo_ids_free`.
 *
 * # Safety
 * `tok` must be a live handle, `text` a NUL-terminated string, the outputs writable.
 */
enum IntermoStatus intermo_tokenizer_encode(const struct IntermoTokenizer *tok,
                                            const char *text,
                                            uint32_t **out_ids,
                                            size_t *out_len);

/**
 * # Safety
 * `ids` and `len` must come from one `intermo_tokenizer_encode` call.
 */
void intermo_ids_free(uint32_t *ids, size_t len);

/**
 * Text of a token id sequence.
 *
 * # Safety
 * `ids` must point to `len` readable ids; `out` must be writable.
 */
enum IntermoStatus intermo_tokenizer_decode(const struct IntermoTokenizer *tok,
                                            const uint32_t *ids,
                                            size_t len,
                                            char **out);

/**
 * Fills `out[0..num_bins]` with the smoothed target distribution for bin `y`.
 *
 * # Safety
 * `out` must point to `out_len` writable doubles, `out_len >= num_bins`.
 */
enum IntermoStatus intermo_smoothing_distribution(size_t y,
                                                  double p_center,
                                                  size_t w,
                                                  size_t num_bins,
                                                  double *out,
                                                  size_t out_len);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void intermo_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INTERMO_H */
