class Scaler {
public:
  long scale(int value){
    long factor = 3;
    return value * factor;
  }
};
