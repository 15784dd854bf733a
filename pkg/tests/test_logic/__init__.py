# Logic tests package
