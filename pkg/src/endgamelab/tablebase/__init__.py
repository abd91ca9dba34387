from .build import build_all
from .encode import Encoding, EncodingError, deindex, encoding, index
from .generate import GenerationError, MissingDependencyError, generate
from .oracle import ForwardOracle
from .probe import (
    LabeledPosition,
    MissingTablebaseError,
    MoveLabel,
    ProbeError,
    TablebaseSet,
    Wdl,
    label_moves,
    probe_wdl,
)
from .sig import (
    MaterialSig,
    all_signatures,
    dependencies,
    generation_order,
    material_signature,
    signature_orientation,
)
from .store import (
    ChecksumError,
    MagicError,
    StoreError,
    Tablebase,
    TruncationError,
    VersionError,
    load,
    save,
    table_path,
)
from .verify import check_signature, sample_legal_indices, sweep

__all__ = [
    "build_all",
    "Encoding",
    "EncodingError",
    "deindex",
    "encoding",
    "index",
    "GenerationError",
    "MissingDependencyError",
    "generate",
    "ForwardOracle",
    "LabeledPosition",
    "MissingTablebaseError",
    "MoveLabel",
    "ProbeError",
    "TablebaseSet",
    "Wdl",
    "label_moves",
    "probe_wdl",
    "MaterialSig",
    "all_signatures",
    "dependencies",
    "generation_order",
    "material_signature",
    "signature_orientation",
    "ChecksumError",
    "MagicError",
    "StoreError",
    "Tablebase",
    "TruncationError",
    "VersionError",
    "load",
    "save",
    "table_path",
    "check_signature",
    "sample_legal_indices",
    "sweep",
]
