from .datasets import read_dataset, read_params, read_priors, read_truth, write_dataset, write_truth
from .outputs import OutputSet
from .tables import dumps, read_csv, read_header, read_json, write_csv, write_json
from .traces import read_trace, trace_frame, write_trace_csv, write_trace_json
