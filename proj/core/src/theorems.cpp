namespace regmod {}
