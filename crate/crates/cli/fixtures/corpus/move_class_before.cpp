namespace alpha {
class Logger {
public:
  int level;
  void raise(int amount){
    level = level + amount;
  }
};
}
