from halfdr.service.app import BOUNDARY, MJPEGServer, create_app, parse_address, serve
from halfdr.service.schemas import StatsModel
from halfdr.service.slot import EncodedFrame, FrameSlot

__all__ = [
    "BOUNDARY",
    "EncodedFrame",
    "FrameSlot",
    "MJPEGServer",
    "StatsModel",
    "create_app",
    "parse_address",
    "serve",
]
