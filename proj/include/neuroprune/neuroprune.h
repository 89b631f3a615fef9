/* Copyright 2026 The neuroprune Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NEUROPRUNE_NEUROPRUNE_H_
#define NEUROPRUNE_NEUROPRUNE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NP_API __declspec(dllexport)
#else
#define NP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Non-zero values match the library's error kinds. */
typedef enum np_status {
  NP_OK = 0,
  NP_ERR_INVALID_ARGUMENT = 1,
  NP_ERR_SHAPE_MISMATCH = 2,
  NP_ERR_MISSING_ARTIFACT = 3,
  NP_ERR_IO = 4,
  NP_ERR_CORRUPT_HEADER = 5,
  NP_ERR_TRUNCATED_BLOB = 6,
  NP_ERR_SIZE_MISMATCH = 7,
  NP_ERR_DTYPE_MISMATCH = 8,
  NP_ERR_ENDIANNESS_MISMATCH = 9,
  NP_ERR_EMPTY_CLASS = 10,
  NP_ERR_NUMERICAL = 11,
  NP_ERR_STATE = 12,
  NP_ERR_INTERNAL = 13
} np_status;

typedef struct np_run np_run;
typedef struct np_network np_network;
typedef struct np_dataset np_dataset;

typedef void (*np_log_fn)(const char* line, void* user);

NP_API const char* np_version(void);

/* Message of the last failed call on this thread; "" after a success. */
NP_API const char* np_last_error_message(void);

/* Short stable name of a status ("ok", "missing_artifact", ...). */
NP_API const char* np_status_name(np_status status);

/* Run configuration ------------------------------------------------------ */

NP_API np_status np_run_load(const char* config_path, np_run** out);
/* base_dir resolves relative workspace and file references; may be NULL. */
NP_API np_status np_run_from_json(const char* json, const char* base_dir, np_run** out);
NP_API void np_run_free(np_run* run);

NP_API np_status np_run_set_workspace(np_run* run, const char* workspace);
/* Writes the NUL-terminated workspace path into buf; *needed receives the
   required size including the terminator. */
NP_API np_status np_run_workspace(const np_run* run, char* buf, size_t size, size_t* needed);
NP_API np_status np_run_set_log(np_run* run, np_log_fn fn, void* user);

/* stage: gen-data, train, attribute, rank, sweep, category-sweep, retrain,
   report or all. strategies: comma-separated sweep strategies overriding the
   config, or NULL. */
NP_API np_status np_run_stage(np_run* run, const char* stage, const char* strategies);

/* Networks --------------------------------------------------------------- */

NP_API np_status np_network_load(const char* path, np_network** out);
NP_API void np_network_free(np_network* net);
NP_API size_t np_network_input_size(const np_network* net);
NP_API size_t np_network_output_size(const np_network* net);
NP_API size_t np_network_num_layers(const np_network* net);
NP_API np_status np_network_forward(const np_network* net, const float* x, size_t n,
                                    float* out, size_t out_n);

/* Integrated-gradients attributions of the neurons of a rankable layer to
   output j, zero baseline. out receives one value per neuron. */
NP_API np_status np_ig_internal(const np_network* net, size_t layer, const float* x, size_t n,
                                size_t j, size_t steps, double* out, size_t out_n);

/* Datasets --------------------------------------------------------------- */

NP_API np_status np_dataset_load(const char* path, np_dataset** out);
NP_API void np_dataset_free(np_dataset* ds);
NP_API size_t np_dataset_size(const np_dataset* ds);
NP_API size_t np_dataset_num_classes(const np_dataset* ds);
NP_API size_t np_dataset_image_size(const np_dataset* ds);
NP_API np_status np_dataset_sample(const np_dataset* ds, size_t index, float* image, size_t n,
                                   uint32_t* label);

/* Accuracy of net on ds (dataset-wide, dropout off). */
NP_API np_status np_evaluate(const np_network* net, const np_dataset* ds, double* accuracy,
                             double* loss);

#ifdef __cplusplus
}
#endif

#endif /* NEUROPRUNE_NEUROPRUNE_H_ */
