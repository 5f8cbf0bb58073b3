# Commands package
from . import barcode, dimension, esum, sample, scaling, verify

COMMANDS = [sample, barcode, esum, scaling, dimension, verify]
