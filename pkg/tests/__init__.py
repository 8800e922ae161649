# Test package for the TDM toolchain
