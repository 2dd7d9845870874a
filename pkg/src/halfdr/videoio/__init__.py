from halfdr.videoio.jpeg import DEFAULT_QUALITY, encode_jpeg
from halfdr.videoio.ppm import (
    PPMError,
    PPMSequenceWriter,
    read_ppm,
    read_ppm_sequence,
    write_ppm,
    write_ppm_sequence,
)
from halfdr.videoio.y4m import (
    VideoHeader,
    Y4MColorspaceError,
    Y4MError,
    Y4MHeaderError,
    Y4MTruncatedError,
    Y4MWriter,
    read_y4m,
    read_y4m_ycbcr,
    rgb_to_ycbcr,
    write_y4m,
    write_y4m_ycbcr,
    ycbcr_to_rgb,
)

__all__ = [
    "DEFAULT_QUALITY",
    "PPMError",
    "PPMSequenceWriter",
    "VideoHeader",
    "Y4MColorspaceError",
    "Y4MError",
    "Y4MHeaderError",
    "Y4MTruncatedError",
    "Y4MWriter",
    "encode_jpeg",
    "read_ppm",
    "read_ppm_sequence",
    "read_y4m",
    "read_y4m_ycbcr",
    "rgb_to_ycbcr",
    "write_ppm",
    "write_ppm_sequence",
    "write_y4m",
    "write_y4m_ycbcr",
    "ycbcr_to_rgb",
]
