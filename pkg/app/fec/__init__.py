# Codes, channel and decoders
