"""graphvid: compact superpixel-graph representation of video clips.

Public surface: frame ingest and clip windowing, SLIC segmentation, graph
construction, augmentations, the relational graph network engine, binary
graph serialization, and the generation benchmark.
"""

from .augment import (AugmentConfig, apply_agen, apply_agnn, apply_all,
                      apply_rrs, apply_rrse, default_rng, derive_clip_seed)
from .bench import BenchReport, BenchRow, run_benchmark, synthetic_clip
from .cache import cached_build
from .graph import (SPATIAL, TEMPORAL, BuilderConfig, Edge, Node, SizeReport,
                    VideoGraph, build_from_segmentations, build_spatial_edges,
                    build_temporal_edges, build_video_graph, centroid_distance,
                    default_d_proximity, empty_graph, representation_size,
                    size_report)
from .media import (ClipSpec, Frame, MediaError, enumerate_clips,
                    load_frame_sequence, read_ppm, write_ppm)
from .model import (AdamState, LogitsView, ModelConfig, RgcnModel,
                    count_flops, count_params, cross_entropy, infer_views,
                    load_checkpoint, save_checkpoint, train_step, view_indices)
from .slic import (Segmentation, SlicConfig, Superpixel, mean_colors,
                   regions_from_labels, rgb_to_lab, segment, write_label_pgm)
from .store import (StoreError, graph_from_bytes, graph_to_bytes, read_graph,
                    write_graph, write_graph_json)

__version__ = "0.1.0"
